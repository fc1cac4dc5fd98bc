//! Kernel functions ψ: increasing, with ψ′ ≠ 0 on `[a, b]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::series::Series;

/// Builtin kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Builtin {
    Identity,
    /// `t^rho`, `rho > 0`.
    Power { rho: f64 },
    /// `e^t`.
    Exponential,
    /// `c t + d`, `c > 0`.
    Affine { c: f64, d: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Builtin(Builtin),
    Custom,
}

/// A kernel function with its derivatives and inverse on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiFunction {
    kind: Kind,
    expr: Expr,
    a: f64,
    b: f64,
    max_order: Option<usize>,
    psi_a: f64,
    psi_b: f64,
}

/// Why a kernel failed validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// ψ′(t) ≤ 0 (or numerically zero).
    Derivative { t: f64, value: f64 },
    /// `inverse(ψ(t))` differs from `t`.
    Inverse { t: f64, error: f64 },
    /// ψ or ψ′ could not be evaluated.
    Evaluation { t: f64, message: String },
}

impl Violation {
    pub fn t(&self) -> f64 {
        match self {
            Violation::Derivative { t, .. } | Violation::Inverse { t, .. } | Violation::Evaluation { t, .. } => *t,
        }
    }
}

impl PsiFunction {
    pub fn builtin(family: Builtin, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        let t = Expr::t();
        let expr = match family {
            Builtin::Identity => t,
            Builtin::Power { rho } => {
                if !(rho > 0.0) || !rho.is_finite() {
                    return Err(Error::Domain(format!("power kernel needs rho > 0, got {rho}")));
                }
                if a < 0.0 {
                    return Err(Error::Domain(format!("power kernel t^{rho} undefined on [{a}, {b}]")));
                }
                if a == 0.0 && rho < 1.0 {
                    return Err(Error::Domain(format!("power kernel t^{rho} has unbounded derivative at 0")));
                }
                t.powf(rho)
            }
            Builtin::Exponential => t.exp(),
            Builtin::Affine { c, d } => {
                if !(c > 0.0) || !d.is_finite() {
                    return Err(Error::Domain(format!("affine kernel needs c > 0, got c = {c}")));
                }
                Expr::Const(c).mul(t).add(Expr::Const(d))
            }
        };
        Self::build(Kind::Builtin(family), expr, a, b, None)
    }

    /// A user kernel given as an expression in `t`. `max_order` bounds the
    /// derivatives that may be requested (`None` for unlimited). The result
    /// is not validated; call [`PsiFunction::validate`].
    pub fn custom(expr: Expr, a: f64, b: f64, max_order: Option<usize>) -> Result<Self> {
        check_interval(a, b)?;
        if let Some(v) = expr.vars().into_iter().find(|v| *v != Var::T) {
            return Err(Error::Invalid(format!("kernel may only depend on t, found `{}`", v.name())));
        }
        Self::build(Kind::Custom, expr, a, b, max_order)
    }

    fn build(kind: Kind, expr: Expr, a: f64, b: f64, max_order: Option<usize>) -> Result<Self> {
        let mut psi = Self { kind, expr, a, b, max_order, psi_a: 0.0, psi_b: 0.0 };
        psi.psi_a = psi.eval(a)?;
        psi.psi_b = psi.eval(b)?;
        Ok(psi)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn psi_a(&self) -> f64 {
        self.psi_a
    }

    pub fn psi_b(&self) -> f64 {
        self.psi_b
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn family(&self) -> Option<Builtin> {
        match self.kind {
            Kind::Builtin(b) => Some(b),
            Kind::Custom => None,
        }
    }

    pub fn max_order(&self) -> Option<usize> {
        self.max_order
    }

    /// Same kernel on another interval.
    pub fn with_domain(&self, a: f64, b: f64) -> Result<Self> {
        match self.kind {
            Kind::Builtin(f) => Self::builtin(f, a, b),
            Kind::Custom => Self::custom(self.expr.clone(), a, b, self.max_order),
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        match self.max_order {
            Some(max) if k > max => Err(Error::MissingPsiDerivative { requested: k, available: max }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.expr.eval_vars(&|v| (v == Var::T).then_some(t))
    }

    /// `ψ(t) − ψ(a)`.
    pub fn kernel(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)? - self.psi_a)
    }

    pub fn deriv(&self, t: f64) -> Result<f64> {
        self.deriv_k(t, 1)
    }

    /// `ψ^{(k)}(t)`.
    pub fn deriv_k(&self, t: f64, k: usize) -> Result<f64> {
        if k == 0 {
            return self.eval(t);
        }
        Ok(self.taylor(t, k + 1)?.derivative(k))
    }

    /// Taylor series of `h ↦ ψ(t0 + h)` with `len` coefficients.
    pub fn taylor(&self, t0: f64, len: usize) -> Result<Series> {
        self.check_order(len.saturating_sub(1))?;
        struct TEnv(Series);
        impl Env<Series> for TEnv {
            fn constant(&self, c: f64) -> Series {
                Series::constant(c, self.0.len())
            }
            fn var(&self, v: Var) -> Result<Series> {
                match v {
                    Var::T => Ok(self.0.clone()),
                    other => Err(Error::Unbound(other.name())),
                }
            }
            fn psi_deriv(&self, k: u32) -> Result<Series> {
                Err(Error::Unbound(format!("psi derivative {k}")))
            }
        }
        self.expr.eval_with(&TEnv(Series::variable(t0, len)))
    }

    /// `ψ⁻¹(v)`: analytic for builtins, numeric otherwise.
    pub fn inverse(&self, v: f64) -> Result<f64> {
        self.check_range(v)?;
        let t = match self.kind {
            Kind::Builtin(Builtin::Identity) => v,
            Kind::Builtin(Builtin::Power { rho }) => v.max(0.0).powf(1.0 / rho),
            Kind::Builtin(Builtin::Exponential) => v.ln(),
            Kind::Builtin(Builtin::Affine { c, d }) => (v - d) / c,
            Kind::Custom => return self.invert_numeric(v),
        };
        Ok(t.clamp(self.a, self.b))
    }

    fn check_range(&self, v: f64) -> Result<()> {
        let slack = 1e-14 * self.psi_a.abs().max(self.psi_b.abs()).max(1.0);
        if !(v >= self.psi_a - slack && v <= self.psi_b + slack) {
            return Err(Error::OutOfRange { value: v, lo: self.psi_a, hi: self.psi_b });
        }
        Ok(())
    }

    /// Bracketed bisection followed by a secant polish on the monotone ψ.
    pub fn invert_numeric(&self, v: f64) -> Result<f64> {
        self.check_range(v)?;
        let tol = 1e-12 * v.abs().max(1.0);
        let (mut lo, mut hi) = (self.a, self.b);
        let (mut flo, mut fhi) = (self.psi_a - v, self.psi_b - v);
        if flo.abs() <= tol {
            return Ok(lo);
        }
        if fhi.abs() <= tol {
            return Ok(hi);
        }
        for _ in 0..200 {
            if hi - lo <= 1e-6 * (self.b - self.a) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let fm = self.eval(mid)? - v;
            if fm.abs() <= tol {
                return Ok(mid);
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
        }
        // secant polish, falling back to bisection whenever a step leaves the bracket
        for _ in 0..100 {
            let mut next = hi - fhi * (hi - lo) / (fhi - flo);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let fn_ = self.eval(next)? - v;
            if fn_.abs() <= tol || hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                return Ok(next);
            }
            if (fn_ < 0.0) == (flo < 0.0) {
                lo = next;
                flo = fn_;
            } else {
                hi = next;
                fhi = fn_;
            }
        }
        Ok(if flo.abs() < fhi.abs() { lo } else { hi })
    }

    /// Check ψ′ > 0 and the inverse round trip at `samples` Chebyshev points.
    /// Between samples, local minima of ψ′ are refined so isolated stationary
    /// points are caught. Returns the first violation in increasing `t`.
    pub fn validate(&self, samples: usize) -> std::result::Result<(), Violation> {
        let n = samples.max(2);
        let (a, b) = (self.a, self.b);
        let mut ts: Vec<f64> = (0..n)
            .map(|k| 0.5 * (a + b) - 0.5 * (b - a) * (PI * k as f64 / (n - 1) as f64).cos())
            .collect();
        ts[0] = a;
        ts[n - 1] = b;
        let mut d = Vec::with_capacity(n);
        for &t in &ts {
            match self.deriv(t) {
                Ok(v) => d.push(v),
                Err(e) => return Err(Violation::Evaluation { t, message: e.to_string() }),
            }
        }
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let zero = 1e-10 * scale;
        let mut candidates: Vec<(f64, f64)> = ts.iter().copied().zip(d.iter().copied()).collect();
        for i in 1..n.saturating_sub(1) {
            if d[i] <= d[i - 1] && d[i] <= d[i + 1] {
                if let Some(found) = self.refine_min_derivative(ts[i - 1], ts[i + 1]) {
                    candidates.push(found);
                }
            }
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (t, value) in candidates {
            if !(value > zero) {
                return Err(Violation::Derivative { t, value });
            }
        }
        for &t in &ts {
            let roundtrip = self.eval(t).and_then(|v| self.inverse(v));
            match roundtrip {
                Ok(back) if (back - t).abs() <= 1e-10 => {}
                Ok(back) => return Err(Violation::Inverse { t, error: (back - t).abs() }),
                Err(e) => return Err(Violation::Evaluation { t, message: e.to_string() }),
            }
        }
        Ok(())
    }

    fn refine_min_derivative(&self, mut lo: f64, mut hi: f64) -> Option<(f64, f64)> {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| self.deriv(t).ok();
        let mut c = hi - r * (hi - lo);
        let mut d = lo + r * (hi - lo);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        for _ in 0..80 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - r * (hi - lo);
                fc = f(c)?;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + r * (hi - lo);
                fd = f(d)?;
            }
        }
        let t = 0.5 * (lo + hi);
        Some((t, f(t)?))
    }

    /// Local ψ-chart at `t0` with `len` coefficients; see [`Chart`].
    pub fn chart(&self, t0: f64, len: usize) -> Result<Chart> {
        let taylor = self.taylor(t0, len)?;
        let q = taylor.revert()?;
        let t = q.add_scalar(t0);
        let p = Series::variable(taylor.value() - self.psi_a, len);
        Ok(Chart { psi: self.clone(), t0, len, q, t, p })
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("kernel interval [{a}, {b}] must satisfy a < b")));
    }
    Ok(())
}

/// Series in `s = ψ(t) − ψ(t0)` around a base point `t0`.
///
/// Evaluating an expression with `t` bound to [`Chart::t`] and `psi` bound
/// to [`Chart::p`] yields its Taylor series in `s`, whose `m`-th derivative
/// is the ψ-derivative `(1/ψ′ d/dt)^m` at `t0`.
#[derive(Debug, Clone)]
pub struct Chart {
    psi: PsiFunction,
    pub t0: f64,
    pub len: usize,
    q: Series,
    /// `t(s)`.
    pub t: Series,
    /// `ψ(t(s)) − ψ(a)`.
    pub p: Series,
}

impl Chart {
    /// `ψ^{(k)}(t(s))`.
    pub fn psi_deriv(&self, k: usize) -> Result<Series> {
        let mut d = self.psi.taylor(self.t0, self.len + k)?;
        for _ in 0..k {
            d = d.differentiate();
        }
        Ok(d.compose(&self.q))
    }

    pub fn constant(&self, c: f64) -> Series {
        Series::constant(c, self.len)
    }
}
