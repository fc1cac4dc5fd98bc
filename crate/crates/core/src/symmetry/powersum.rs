//! Exact fractional derivatives of finite sums `Σ c_j P^{β_j}`.

use crate::error::Result;
use crate::expr::{Expr, Var};
use crate::fracops::frac_derivative;
use crate::jet::JetFunction;
use crate::prolong::ProlongSpec;
use crate::special::{gamma, rgamma};

/// `Σ c_j P^{β_j}` with `P = ψ(t) − ψ(a)`, exponents sorted and merged.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum(pub Vec<(f64, f64)>);

impl PowerSum {
    fn single(c: f64, beta: f64) -> Self {
        PowerSum(vec![(c, beta)])
    }

    fn normalize(mut terms: Vec<(f64, f64)>) -> Self {
        terms.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        for (c, b) in terms {
            match out.last_mut() {
                Some(last) if last.1 == b => last.0 += c,
                _ => out.push((c, b)),
            }
        }
        out.retain(|t| t.0 != 0.0);
        PowerSum(out)
    }

    fn mul(&self, o: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.0.len() * o.0.len());
        for (c1, b1) in &self.0 {
            for (c2, b2) in &o.0 {
                terms.push((c1 * c2, b1 + b2));
            }
        }
        Self::normalize(terms)
    }

    /// `D^{α;ψ} Σ c P^β = Σ c Γ(β+1)/Γ(β+1−α) P^{β−α}`; needs every `β > −1`.
    pub fn derivative(&self, alpha: f64, p: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (c, b) in &self.0 {
            acc += c * gamma(b + 1.0)? * rgamma(b + 1.0 - alpha) * p.powf(b - alpha);
        }
        Ok(acc)
    }
}

/// Decompose an expression in `P` alone (constants allowed) into a power sum.
pub fn power_sum(e: &Expr) -> Option<PowerSum> {
    if e.vars().iter().all(|v| *v != Var::P) && !e.vars().is_empty() {
        return None;
    }
    match e {
        Expr::Const(c) => Some(PowerSum::normalize(vec![(*c, 0.0)])),
        Expr::Var(Var::P) => Some(PowerSum::single(1.0, 1.0)),
        Expr::Var(_) | Expr::PsiDeriv(_) => None,
        Expr::Neg(a) => power_sum(a).map(|s| PowerSum(s.0.into_iter().map(|(c, b)| (-c, b)).collect())),
        Expr::Add(a, b) => {
            let (mut x, y) = (power_sum(a)?, power_sum(b)?);
            x.0.extend(y.0);
            Some(PowerSum::normalize(x.0))
        }
        Expr::Sub(a, b) => {
            let (mut x, y) = (power_sum(a)?, power_sum(b)?);
            x.0.extend(y.0.into_iter().map(|(c, b)| (-c, b)));
            Some(PowerSum::normalize(x.0))
        }
        Expr::Mul(a, b) => Some(power_sum(a)?.mul(&power_sum(b)?)),
        Expr::Div(a, b) => {
            let d = power_sum(b)?;
            match d.0.as_slice() {
                [(c, beta)] => Some(power_sum(a)?.mul(&PowerSum::single(1.0 / c, -beta))),
                _ => None,
            }
        }
        Expr::Pow(base, ex) => {
            let k = ex.as_const()?;
            let s = power_sum(base)?;
            match s.0.as_slice() {
                [] => Some(PowerSum(vec![])),
                [(c, beta)] if *c > 0.0 || k.fract() == 0.0 => Some(PowerSum::single(c.powf(k), beta * k)),
                _ if k.fract() == 0.0 && (0.0..=16.0).contains(&k) => {
                    let mut acc = PowerSum::single(1.0, 0.0);
                    for _ in 0..k as usize {
                        acc = acc.mul(&s);
                    }
                    Some(acc)
                }
                _ => None,
            }
        }
        Expr::Exp(_) | Expr::Ln(_) => {
            let v = e.eval_vars(&|_| None).ok()?;
            Some(PowerSum::normalize(vec![(v, 0.0)]))
        }
    }
}

/// `D^{α;ψ}` of an expression in `t` (with `x`, `u` already frozen): exact
/// when it is a power sum in `P`, numerical otherwise.
pub fn frac_derivative_expr(e: &Expr, spec: &ProlongSpec, t: f64) -> Result<f64> {
    let p = spec.psi.kernel(t)?;
    if let Some(s) = power_sum(e) {
        if s.0.iter().all(|(_, b)| *b > -1.0) {
            return s.derivative(spec.alpha(), p);
        }
    }
    frac_derivative(&JetFunction::new(e.clone()), &spec.psi, spec.order, t, spec.quad, spec.step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::psi::{Builtin, PsiFunction};

    #[test]
    fn decomposes_polynomials_and_powers() {
        let s = power_sum(&parse("3*psi^2 - psi^(-0.5)/2 + 1").unwrap()).unwrap();
        assert_eq!(s.0, vec![(-0.5, -0.5), (1.0, 0.0), (3.0, 2.0)]);
        let s = power_sum(&parse("(1 + psi)^2").unwrap()).unwrap();
        assert_eq!(s.0, vec![(1.0, 0.0), (2.0, 1.0), (1.0, 2.0)]);
        assert!(power_sum(&parse("exp(psi)").unwrap()).is_none());
        assert!(power_sum(&parse("x*psi").unwrap()).is_none());
    }

    #[test]
    fn exact_route_matches_numerical_route() {
        let psi = PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap();
        let spec = ProlongSpec::new(psi, 0.5).unwrap();
        let e = parse("psi^2 + 2*psi").unwrap();
        let exact = frac_derivative_expr(&e, &spec, 0.8).unwrap();
        let num = frac_derivative(&JetFunction::new(e), &spec.psi, spec.order, 0.8, spec.quad, None).unwrap();
        assert!((exact - num).abs() < 1e-7 * exact.abs());
    }

    #[test]
    fn eigenfunction_of_half_derivative() {
        // D^{1/2} P^{-1/2} = 0
        let s = PowerSum(vec![(1.0, -0.5)]);
        assert_eq!(s.derivative(0.5, 0.7).unwrap(), 0.0);
    }
}
