//! Jet functions: expressions with exact partial and ψ-derivatives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::expr::{parse, Env, Expr, Var};
use crate::psi::{Chart, PsiFunction};
use crate::series::Series;

/// Declared jet order used when none is given.
pub const DEFAULT_JET_ORDER: usize = 64;

/// A scalar function of `(x, t)` and possibly of the jet variables
/// `u, u_x, ...`, with derivatives available up to a declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct JetFunction {
    expr: Expr,
    order: usize,
}

impl JetFunction {
    pub fn new(expr: Expr) -> Self {
        Self { expr, order: DEFAULT_JET_ORDER }
    }

    pub fn with_order(expr: Expr, order: usize) -> Self {
        Self { expr, order }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::new(parse(src)?))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Expr::Const(c))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn check(&self, requested: usize) -> Result<()> {
        if requested > self.order {
            return Err(Error::JetOrder { requested, declared: self.order });
        }
        Ok(())
    }

    /// `∂^{i+j} f / ∂x^i ∂t^j` as an expression.
    pub fn partial(&self, i: usize, j: usize) -> Result<Expr> {
        self.check(i + j)?;
        Ok(self.expr.diff_n(Var::X, i).diff_n(Var::T, j))
    }

    /// Partial derivative in one of the jet-space variables.
    pub fn partial_in(&self, v: Var, n: usize) -> Result<Self> {
        self.check(n)?;
        Ok(Self { expr: self.expr.diff_n(v, n), order: self.order - n })
    }

    /// Value at `(x, t)`; jet variables must not appear.
    pub fn eval(&self, x: f64, t: f64, psi: &PsiFunction) -> Result<f64> {
        let env = PointEnv { x: Some(x), t, p: psi.kernel(t)?, psi, u: None };
        self.expr.eval_with(&env)
    }

    pub fn eval_partial(&self, i: usize, j: usize, x: f64, t: f64, psi: &PsiFunction) -> Result<f64> {
        let env = PointEnv { x: Some(x), t, p: psi.kernel(t)?, psi, u: None };
        self.partial(i, j)?.eval_with(&env)
    }

    /// View as a function of `t` at fixed `x`, with jet variables taken from `u`.
    pub fn along(&self, x: f64, u: Option<&SolutionJet>) -> Along {
        Along { expr: self.expr.clone(), x: Some(x), u: u.cloned(), order: self.order }
    }
}

/// A function of one time variable, evaluated either pointwise or as a
/// series in the local ψ-chart.
pub trait TimeFunction {
    /// Value at `t`; `p = ψ(t) − ψ(a)` is passed in so callers working in
    /// `v = ψ(t)` keep it exact.
    fn value(&self, t: f64, p: f64, psi: &PsiFunction) -> Result<f64>;

    /// Taylor series in `s = ψ(t) − ψ(t0)` on the given chart.
    fn series(&self, chart: &Chart) -> Result<Series> {
        let _ = chart;
        Err(Error::NotImplemented("series expansion of this function"))
    }

    /// Declared derivative order.
    fn order(&self) -> usize {
        DEFAULT_JET_ORDER
    }

    /// `f^{[k]}_ψ(t)` for `k = 0..=m`.
    fn psi_jet(&self, t: f64, psi: &PsiFunction, m: usize) -> Result<Vec<f64>> {
        if m > self.order() {
            return Err(Error::JetOrder { requested: m, declared: self.order() });
        }
        let chart = psi.chart(t, m + 1)?;
        let s = self.series(&chart)?;
        Ok((0..=m).map(|k| s.derivative(k)).collect())
    }
}

impl TimeFunction for JetFunction {
    fn value(&self, t: f64, p: f64, psi: &PsiFunction) -> Result<f64> {
        self.expr.eval_with(&PointEnv { x: None, t, p, psi, u: None })
    }

    fn series(&self, chart: &Chart) -> Result<Series> {
        self.expr.eval_with(&ChartEnv { chart, x: None, u: None })
    }

    fn order(&self) -> usize {
        self.order
    }
}

/// An expression restricted to fixed `x`, composed with a solution jet.
#[derive(Debug, Clone)]
pub struct Along {
    expr: Expr,
    x: Option<f64>,
    u: Option<SolutionJet>,
    order: usize,
}

impl Along {
    pub fn new(expr: Expr, x: f64, u: Option<&SolutionJet>) -> Self {
        Self { expr, x: Some(x), u: u.cloned(), order: DEFAULT_JET_ORDER }
    }
}

impl TimeFunction for Along {
    fn value(&self, t: f64, p: f64, psi: &PsiFunction) -> Result<f64> {
        self.expr.eval_with(&PointEnv { x: self.x, t, p, psi, u: self.u.as_ref() })
    }

    fn series(&self, chart: &Chart) -> Result<Series> {
        self.expr.eval_with(&ChartEnv { chart, x: self.x, u: self.u.as_ref() })
    }

    fn order(&self) -> usize {
        self.order
    }
}

/// A time function given only by point values (no series).
pub struct PointFn<F>(pub F);

impl<F: Fn(f64, f64) -> Result<f64>> TimeFunction for PointFn<F> {
    fn value(&self, t: f64, p: f64, _psi: &PsiFunction) -> Result<f64> {
        (self.0)(t, p)
    }
}

/// A solution candidate `u(x, t)` exposing all mixed partials exactly.
#[derive(Debug, Clone)]
pub struct SolutionJet {
    inner: Arc<SolutionInner>,
}

#[derive(Debug)]
struct SolutionInner {
    u: JetFunction,
    partials: Mutex<HashMap<(usize, usize), Expr>>,
}

impl SolutionJet {
    pub fn new(u: JetFunction) -> Result<Self> {
        if u.expr().has_jet_vars() {
            return Err(Error::Invalid("a solution jet must be a function of x and t only".into()));
        }
        Ok(Self { inner: Arc::new(SolutionInner { u, partials: Mutex::new(HashMap::new()) }) })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(JetFunction::parse(src)?)
    }

    pub fn function(&self) -> &JetFunction {
        &self.inner.u
    }

    /// `∂^{i+j} u / ∂x^i ∂t^j`.
    pub fn partial(&self, i: usize, j: usize) -> Result<Expr> {
        let mut cache = self.inner.partials.lock().expect("jet cache poisoned");
        if let Some(e) = cache.get(&(i, j)) {
            return Ok(e.clone());
        }
        let e = self.inner.u.partial(i, j)?;
        cache.insert((i, j), e.clone());
        Ok(e)
    }

    pub fn eval(&self, i: usize, j: usize, x: f64, t: f64, psi: &PsiFunction) -> Result<f64> {
        self.inner.u.eval_partial(i, j, x, t, psi)
    }

    /// The time slice `t ↦ ∂_x^i u(x, t)`.
    pub fn slice(&self, i: usize, x: f64) -> Result<Along> {
        Ok(Along { expr: self.partial(i, 0)?, x: Some(x), u: None, order: self.inner.u.order() - i })
    }
}

/// Point evaluation environment.
pub struct PointEnv<'a> {
    pub x: Option<f64>,
    pub t: f64,
    pub p: f64,
    pub psi: &'a PsiFunction,
    pub u: Option<&'a SolutionJet>,
}

impl Env<f64> for PointEnv<'_> {
    fn constant(&self, c: f64) -> f64 {
        c
    }

    fn var(&self, v: Var) -> Result<f64> {
        match v {
            Var::X => self.x.ok_or_else(|| Error::Unbound("x".into())),
            Var::T => Ok(self.t),
            Var::P => Ok(self.p),
            Var::Jet(i, j) => {
                let u = self.u.ok_or_else(|| Error::Unbound(v.name()))?;
                let e = u.partial(i as usize, j as usize)?;
                e.eval_with(&PointEnv { x: self.x, t: self.t, p: self.p, psi: self.psi, u: None })
            }
        }
    }

    fn psi_deriv(&self, k: u32) -> Result<f64> {
        self.psi.deriv_k(self.t, k as usize)
    }
}

/// Series evaluation environment on a ψ-chart.
pub struct ChartEnv<'a> {
    pub chart: &'a Chart,
    pub x: Option<f64>,
    pub u: Option<&'a SolutionJet>,
}

impl Env<Series> for ChartEnv<'_> {
    fn constant(&self, c: f64) -> Series {
        self.chart.constant(c)
    }

    fn var(&self, v: Var) -> Result<Series> {
        match v {
            Var::X => self.x.map(|x| self.chart.constant(x)).ok_or_else(|| Error::Unbound("x".into())),
            Var::T => Ok(self.chart.t.clone()),
            Var::P => Ok(self.chart.p.clone()),
            Var::Jet(i, j) => {
                let u = self.u.ok_or_else(|| Error::Unbound(v.name()))?;
                let e = u.partial(i as usize, j as usize)?;
                e.eval_with(&ChartEnv { chart: self.chart, x: self.x, u: None })
            }
        }
    }

    fn psi_deriv(&self, k: u32) -> Result<Series> {
        self.chart.psi_deriv(k as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::Builtin;

    #[test]
    fn jet_order_is_enforced() {
        let f = JetFunction::with_order(parse("t^3").unwrap(), 2);
        assert!(f.partial(0, 2).is_ok());
        assert_eq!(f.partial(0, 3), Err(Error::JetOrder { requested: 3, declared: 2 }));
        let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 2.0).unwrap();
        assert!(matches!(f.psi_jet(1.0, &psi, 3), Err(Error::JetOrder { .. })));
    }

    #[test]
    fn psi_jet_of_square_kernel() {
        // ψ = t², f = ψ² = t⁴: f^{[1]} = 2ψ, f^{[2]} = 2
        let psi = PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 0.0, 2.0).unwrap();
        let f = JetFunction::parse("t^4").unwrap();
        let jet = f.psi_jet(1.3, &psi, 3).unwrap();
        assert!((jet[1] - 3.38).abs() < 1e-12);
        assert!((jet[2] - 2.0).abs() < 1e-11);
        assert!(jet[3].abs() < 1e-10);
    }

    #[test]
    fn composite_series_follows_the_solution() {
        // u = x t², expression u_t * u at x = 2: 2xt · xt² = 2x²t³ = 8 t³
        let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 2.0).unwrap();
        let u = SolutionJet::parse("x*t^2").unwrap();
        let along = Along::new(parse("u_t*u").unwrap(), 2.0, Some(&u));
        let jet = along.psi_jet(0.5, &psi, 3).unwrap();
        assert!((jet[0] - 1.0).abs() < 1e-14);
        assert!((jet[1] - 24.0 * 0.25).abs() < 1e-12);
        assert!((jet[3] - 48.0).abs() < 1e-10);
        assert!((along.value(0.5, 0.5, &psi).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_partials_agree() {
        let psi = PsiFunction::builtin(Builtin::Exponential, 0.0, 2.0).unwrap();
        let u = SolutionJet::parse("exp(x)*psi^2 + x^3*t").unwrap();
        let a = u.eval(1, 1, 0.4, 0.9, &psi).unwrap();
        let b = JetFunction::new(u.partial(0, 1).unwrap()).eval_partial(1, 0, 0.4, 0.9, &psi).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
