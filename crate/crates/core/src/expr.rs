//! A small closed expression language with exact symbolic differentiation.
//!
//! Grammar: numeric constants, the variables `x`, `t`, `u`, `psi`
//! (meaning `ψ(t) − ψ(a)`), jet variables `u_x`, `u_xx`, `u_t`, `u_xt`, ...,
//! the operators `+ - * / ^`, parentheses and the functions `exp`, `ln`,
//! `sqrt`. Expressions are evaluated either on plain `f64` values or on
//! truncated Taylor [`Series`], which is how every jet derivative in the
//! crate is computed.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::series::Series;

/// Variables of the jet space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    T,
    /// `ψ(t) − ψ(a)`; depends on `t`.
    P,
    /// `∂^{i+j} u / ∂x^i ∂t^j`; `Jet(0, 0)` is `u` itself.
    Jet(u8, u8),
}

impl Var {
    pub const U: Var = Var::Jet(0, 0);

    pub fn name(&self) -> String {
        match self {
            Var::X => "x".into(),
            Var::T => "t".into(),
            Var::P => "psi".into(),
            Var::Jet(0, 0) => "u".into(),
            Var::Jet(i, j) => {
                let mut s = String::from("u_");
                s.extend(std::iter::repeat_n('x', *i as usize));
                s.extend(std::iter::repeat_n('t', *j as usize));
                s
            }
        }
    }

    fn parse_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "t" => Some(Var::T),
            "psi" => Some(Var::P),
            "u" => Some(Var::U),
            _ => {
                let rest = name.strip_prefix("u_")?;
                if rest.is_empty() || !rest.chars().all(|c| c == 'x' || c == 't') {
                    return None;
                }
                let i = rest.chars().filter(|&c| c == 'x').count();
                let j = rest.len() - i;
                // canonical spelling: all x before t
                if !rest.starts_with(&"x".repeat(i)) {
                    return None;
                }
                Some(Var::Jet(i as u8, j as u8))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    /// `ψ^{(k)}(t)` for `k ≥ 1`.
    PsiDeriv(u32),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Exp(Arc<Expr>),
    Ln(Arc<Expr>),
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::Var(v)
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Const(0.0)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn x() -> Self {
        Expr::Var(Var::X)
    }

    pub fn t() -> Self {
        Expr::Var(Var::T)
    }

    pub fn u() -> Self {
        Expr::Var(Var::U)
    }

    pub fn psi() -> Self {
        Expr::Var(Var::P)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn neg(self) -> Self {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => (*inner).clone(),
            e => Expr::Neg(Arc::new(e)),
        }
    }

    pub fn add(self, rhs: Expr) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(a), _) if a == 0.0 => rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Add(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn sub(self, rhs: Expr) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Sub(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn mul(self, rhs: Expr) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => rhs,
            (_, Some(b)) if b == 1.0 => self,
            (Some(a), _) if a == -1.0 => rhs.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => Expr::Mul(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn div(self, rhs: Expr) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::Const(a / b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::Div(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn pow(self, exponent: Expr) -> Self {
        match (self.as_const(), exponent.as_const()) {
            (_, Some(e)) if e == 0.0 => Expr::Const(1.0),
            (_, Some(e)) if e == 1.0 => self,
            (Some(b), Some(e)) if b.powf(e).is_finite() && (b > 0.0 || e == e.trunc()) => {
                Expr::Const(b.powf(e))
            }
            _ => Expr::Pow(Arc::new(self), Arc::new(exponent)),
        }
    }

    pub fn powf(self, e: f64) -> Self {
        self.pow(Expr::Const(e))
    }

    pub fn exp(self) -> Self {
        match self.as_const() {
            Some(c) => Expr::Const(c.exp()),
            None => Expr::Exp(Arc::new(self)),
        }
    }

    pub fn ln(self) -> Self {
        match self.as_const() {
            Some(c) if c > 0.0 => Expr::Const(c.ln()),
            _ => Expr::Ln(Arc::new(self)),
        }
    }

    /// Whether the expression (transitively) depends on `v`. `psi` and
    /// `ψ^{(k)}` count as depending on `t`.
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v || (v == Var::T && *w == Var::P),
            Expr::PsiDeriv(_) => v == Var::T,
            Expr::Neg(a) | Expr::Exp(a) | Expr::Ln(a) => a.depends_on(v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
        }
    }

    /// Set of variables that appear syntactically.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::PsiDeriv(_) => {
                out.insert(Var::T);
            }
            Expr::Neg(a) | Expr::Exp(a) | Expr::Ln(a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Whether any jet variable `u, u_x, ...` appears.
    pub fn has_jet_vars(&self) -> bool {
        self.vars().iter().any(|v| matches!(v, Var::Jet(..)))
    }

    /// Partial derivative, treating all jet variables as independent.
    pub fn diff(&self, v: Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(w) => {
                if *w == v {
                    Expr::Const(1.0)
                } else if *w == Var::P && v == Var::T {
                    Expr::PsiDeriv(1)
                } else {
                    Expr::zero()
                }
            }
            Expr::PsiDeriv(k) => Expr::PsiDeriv(k + 1),
            Expr::Neg(a) => a.diff(v).neg(),
            Expr::Add(a, b) => a.diff(v).add(b.diff(v)),
            Expr::Sub(a, b) => a.diff(v).sub(b.diff(v)),
            Expr::Mul(a, b) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                a.diff(v).mul(b.clone()).add(a.mul(b.diff(v)))
            }
            Expr::Div(a, b) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                let num = a.diff(v).mul(b.clone()).sub(a.mul(b.diff(v)));
                num.div(b.powf(2.0))
            }
            Expr::Pow(base, e) => {
                let (base, e) = (base.as_ref().clone(), e.as_ref().clone());
                if let Some(c) = e.as_const() {
                    Expr::Const(c).mul(base.clone().powf(c - 1.0)).mul(base.diff(v))
                } else {
                    let whole = base.clone().pow(e.clone());
                    let inner = e
                        .diff(v)
                        .mul(base.clone().ln())
                        .add(e.mul(base.diff(v)).div(base));
                    whole.mul(inner)
                }
            }
            Expr::Exp(a) => self.clone().mul(a.diff(v)),
            Expr::Ln(a) => a.diff(v).div(a.as_ref().clone()),
        }
    }

    /// Repeated partial derivative.
    pub fn diff_n(&self, v: Var, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(v))
    }

    /// Total derivative in `x`: `∂_x + Σ u_{i+1,j} ∂_{u_{i,j}}`.
    pub fn total_diff_x(&self) -> Expr {
        let mut out = self.diff(Var::X);
        for v in self.vars() {
            if let Var::Jet(i, j) = v {
                out = out.add(Expr::Var(Var::Jet(i + 1, j)).mul(self.diff(v)));
            }
        }
        out
    }

    /// Total derivative in `t`: `∂_t + Σ u_{i,j+1} ∂_{u_{i,j}}`.
    pub fn total_diff_t(&self) -> Expr {
        let mut out = self.diff(Var::T);
        for v in self.vars() {
            if let Var::Jet(i, j) = v {
                out = out.add(Expr::Var(Var::Jet(i, j + 1)).mul(self.diff(v)));
            }
        }
        out
    }

    /// Replace every occurrence of `v` by `with`.
    pub fn subst(&self, v: Var, with: &Expr) -> Expr {
        if !self.vars().contains(&v) {
            return self.clone();
        }
        self.map_vars(&|w| if w == v { Some(with.clone()) } else { None })
    }

    /// Rebuild the expression with a variable substitution (`None` keeps the variable).
    pub fn map_vars(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) | Expr::PsiDeriv(_) => self.clone(),
            Expr::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => a.map_vars(f).neg(),
            Expr::Add(a, b) => a.map_vars(f).add(b.map_vars(f)),
            Expr::Sub(a, b) => a.map_vars(f).sub(b.map_vars(f)),
            Expr::Mul(a, b) => a.map_vars(f).mul(b.map_vars(f)),
            Expr::Div(a, b) => a.map_vars(f).div(b.map_vars(f)),
            Expr::Pow(a, b) => a.map_vars(f).pow(b.map_vars(f)),
            Expr::Exp(a) => a.map_vars(f).exp(),
            Expr::Ln(a) => a.map_vars(f).ln(),
        }
    }

    /// Generic evaluation on any [`Scalar`].
    pub fn eval_with<S: Scalar>(&self, env: &dyn Env<S>) -> Result<S> {
        Ok(match self {
            Expr::Const(c) => env.constant(*c),
            Expr::Var(v) => env.var(*v)?,
            Expr::PsiDeriv(k) => env.psi_deriv(*k)?,
            Expr::Neg(a) => a.eval_with(env)?.neg(),
            Expr::Add(a, b) => a.eval_with(env)?.add(&b.eval_with(env)?),
            Expr::Sub(a, b) => a.eval_with(env)?.sub(&b.eval_with(env)?),
            Expr::Mul(a, b) => {
                let lhs = a.eval_with(env)?;
                lhs.mul(&b.eval_with(env)?)
            }
            Expr::Div(a, b) => a.eval_with(env)?.div(&b.eval_with(env)?)?,
            Expr::Pow(base, e) => {
                let b = base.eval_with(env)?;
                match e.as_const() {
                    Some(c) => b.powf(c)?,
                    None => {
                        let ev = e.eval_with(env)?;
                        b.ln()?.mul(&ev).exp()
                    }
                }
            }
            Expr::Exp(a) => a.eval_with(env)?.exp(),
            Expr::Ln(a) => a.eval_with(env)?.ln()?,
        })
    }

    /// Evaluate with a closure for variables. `ψ^{(k)}` nodes are an error.
    pub fn eval_vars(&self, f: &dyn Fn(Var) -> Option<f64>) -> Result<f64> {
        struct Closure<'a>(&'a dyn Fn(Var) -> Option<f64>);
        impl Env<f64> for Closure<'_> {
            fn constant(&self, c: f64) -> f64 {
                c
            }
            fn var(&self, v: Var) -> Result<f64> {
                (self.0)(v).ok_or_else(|| Error::Unbound(v.name()))
            }
            fn psi_deriv(&self, k: u32) -> Result<f64> {
                Err(Error::Unbound(format!("psi derivative {k}")))
            }
        }
        self.eval_with(&Closure(f))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

/// Numeric carrier for expression evaluation.
pub trait Scalar: Sized + Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn powf(&self, e: f64) -> Result<Self>;
}

/// Variable bindings for [`Expr::eval_with`].
pub trait Env<S> {
    fn constant(&self, c: f64) -> S;
    fn var(&self, v: Var) -> Result<S>;
    fn psi_deriv(&self, k: u32) -> Result<S>;
}

impl Scalar for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(Error::Domain(format!("logarithm of non-positive value {self}")));
        }
        Ok(f64::ln(*self))
    }
    fn powf(&self, e: f64) -> Result<Self> {
        if e == e.trunc() && e.abs() < 2f64.powi(31) {
            if *self == 0.0 && e < 0.0 {
                return Err(Error::Domain("negative power of zero".into()));
            }
            return Ok(self.powi(e as i32));
        }
        if *self < 0.0 || (*self == 0.0 && e < 0.0) {
            return Err(Error::Domain(format!("power {e} of {self}")));
        }
        Ok(f64::powf(*self, e))
    }
}

impl Scalar for Series {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Series::div(self, o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exp(&self) -> Self {
        Series::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        Series::ln(self)
    }
    fn powf(&self, e: f64) -> Result<Self> {
        Series::powf(self, e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::PsiDeriv(k) => write!(f, "dpsi{k}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 4)
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

/// Parse an expression without named constants.
pub fn parse(src: &str) -> Result<Expr> {
    parse_with(src, &HashMap::new())
}

/// Parse an expression; identifiers found in `constants` are replaced by their values.
pub fn parse_with(src: &str, constants: &HashMap<String, f64>) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, constants };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    constants: &'a HashMap<String, f64>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(self.unary()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.unary()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match name {
                    "exp" | "ln" | "sqrt" => {
                        if !self.eat(b'(') {
                            return Err(self.error("expected `(` after function name"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.error("expected `)`"));
                        }
                        Ok(match name {
                            "exp" => arg.exp(),
                            "ln" => arg.ln(),
                            _ => arg.powf(0.5),
                        })
                    }
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    _ => {
                        if let Some(c) = self.constants.get(name) {
                            return Ok(Expr::Const(*c));
                        }
                        Var::parse_name(name)
                            .map(Expr::Var)
                            .ok_or_else(|| Error::Parse { pos: start, msg: format!("unknown identifier `{name}`") })
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        let text = std::str::from_utf8(&bytes[start..i]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Parse { pos: start, msg: format!("bad number `{text}`") })
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(e: &Expr, x: f64, t: f64, u: f64) -> f64 {
        e.eval_vars(&|v| match v {
            Var::X => Some(x),
            Var::T => Some(t),
            Var::U => Some(u),
            _ => None,
        })
        .unwrap()
    }

    #[test]
    fn parses_precedence() {
        let e = parse("-x^2 + 3*t/2").unwrap();
        assert_eq!(at(&e, 2.0, 4.0, 0.0), -4.0 + 6.0);
        let e = parse("2^-1").unwrap();
        assert_eq!(e.as_const(), Some(0.5));
        let e = parse("exp(u) * (1 + u)/u").unwrap();
        assert!((at(&e, 0.0, 0.0, 1.0) - 2.0 * std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn parses_jet_names() {
        let e = parse("u_xx + u*u_x + u_xt").unwrap();
        let vars = e.vars();
        assert!(vars.contains(&Var::Jet(2, 0)));
        assert!(vars.contains(&Var::Jet(1, 0)));
        assert!(vars.contains(&Var::Jet(1, 1)));
        assert!(parse("u_tx").is_err());
        assert!(parse("foo").is_err());
        assert!(parse("(x").is_err());
    }

    #[test]
    fn named_constants() {
        let mut c = HashMap::new();
        c.insert("b".to_string(), 2.0);
        let e = parse_with("exp(b*u)", &c).unwrap();
        assert!((at(&e, 0.0, 0.0, 0.5) - 1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn display_round_trips() {
        for src in ["x^2*t - 3*u/(1 + u)", "-(x - t)^3", "exp(-2*u) + ln(t)", "u_xx + (-2)*u_x", "2^(x - 1)"] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            for (x, t, u) in [(0.3, 1.2, 0.7), (1.1, 0.4, 2.0)] {
                let a = e.eval_vars(&|v| match v {
                    Var::X => Some(x),
                    Var::T => Some(t),
                    Var::U => Some(u),
                    Var::Jet(1, 0) => Some(0.2),
                    Var::Jet(2, 0) => Some(-0.4),
                    _ => None,
                });
                let b = again.eval_vars(&|v| match v {
                    Var::X => Some(x),
                    Var::T => Some(t),
                    Var::U => Some(u),
                    Var::Jet(1, 0) => Some(0.2),
                    Var::Jet(2, 0) => Some(-0.4),
                    _ => None,
                });
                assert_eq!(a, b, "{src} -> {e}");
            }
        }
    }

    #[test]
    fn symbolic_derivatives() {
        let e = parse("x^3*u + exp(2*u)").unwrap();
        let eu = e.diff(Var::U);
        assert!((at(&eu, 2.0, 0.0, 0.0) - (8.0 + 2.0)).abs() < 1e-14);
        let exx = e.diff_n(Var::X, 2);
        assert!((at(&exx, 2.0, 0.0, 1.5) - 18.0).abs() < 1e-14);
        assert!(e.diff(Var::T).is_zero());
        // psi depends on t through the kernel
        assert_eq!(parse("psi^2").unwrap().diff(Var::T).to_string(), "2*psi*dpsi1");
    }

    #[test]
    fn total_derivative_x() {
        // D_x (x u) = u + x u_x
        let e = parse("x*u").unwrap().total_diff_x();
        let v = e
            .eval_vars(&|v| match v {
                Var::X => Some(2.0),
                Var::U => Some(3.0),
                Var::Jet(1, 0) => Some(5.0),
                _ => None,
            })
            .unwrap();
        assert_eq!(v, 3.0 + 10.0);
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let e = parse("x + t").unwrap();
        assert!(matches!(e.eval_vars(&|_| None), Err(Error::Unbound(_))));
    }
}
