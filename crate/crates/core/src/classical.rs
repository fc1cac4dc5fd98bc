//! Classical Riemann–Liouville calculus with lower terminal 0, from Taylor
//! coefficients and the power rule. Shares no code path with the ψ-charts,
//! the quadrature or the difference stencils, so it serves as an
//! independent reference at `ψ(t) = t`.

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::jet::SolutionJet;
use crate::prolong::Infinitesimals;
use crate::series::Series;
use crate::special::{binom_usize, factorial, gen_binom, rgamma};

/// Taylor length used when none is given.
pub const DEFAULT_TAYLOR_LEN: usize = 48;

struct TaylorEnv {
    t: Series,
    x: f64,
}

impl Env<Series> for TaylorEnv {
    fn constant(&self, c: f64) -> Series {
        Series::constant(c, self.t.len())
    }

    fn var(&self, v: Var) -> Result<Series> {
        match v {
            Var::X => Ok(self.constant(self.x)),
            Var::T | Var::P => Ok(self.t.clone()),
            Var::Jet(..) => Err(Error::Unbound(v.name())),
        }
    }

    fn psi_deriv(&self, k: u32) -> Result<Series> {
        Ok(self.constant(if k == 1 { 1.0 } else { 0.0 }))
    }
}

/// Taylor series of `expr(x, ·)` at `t0`. Jet variables must be substituted first.
pub fn taylor(expr: &Expr, x: f64, t0: f64, len: usize) -> Result<Series> {
    expr.eval_with(&TaylorEnv { t: Series::variable(t0, len), x })
}

/// Replace every jet variable by the matching partial of `u`.
pub fn substitute(expr: &Expr, u: &Expr) -> Expr {
    expr.map_vars(&|v| match v {
        Var::Jet(i, j) => Some(u.diff_n(Var::X, i as usize).diff_n(Var::T, j as usize)),
        _ => None,
    })
}

fn freeze(expr: &Expr, x: f64, u: f64) -> Expr {
    expr.map_vars(&|v| match v {
        Var::X => Some(Expr::Const(x)),
        Var::U => Some(Expr::Const(u)),
        _ => None,
    })
}

/// `d^k/dt^k` of `expr(x, t)` for `k = 0..=n`.
pub fn derivatives(expr: &Expr, x: f64, t: f64, n: usize) -> Result<Vec<f64>> {
    let s = taylor(expr, x, t, n + 1)?;
    Ok((0..=n).map(|k| s.derivative(k)).collect())
}

/// `D^β_{0+} f(t)` for any real `β` via `D^β t^k = k!/Γ(k+1−β) t^{k−β}`.
/// Negative `β` is the integral of order `−β`.
pub fn rl(expr: &Expr, x: f64, beta: f64, t: f64, len: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("classical operator needs t > 0, got {t}")));
    }
    let s = taylor(expr, x, 0.0, len)?;
    let mut acc = 0.0;
    for (k, c) in s.coefficients().iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        acc += c * factorial(k) * rgamma(k as f64 + 1.0 - beta) * t.powf(k as f64 - beta);
    }
    Ok(acc)
}

/// Classical extended coefficient with lower terminal 0 for generators with
/// `τ(x, 0, u) = 0`, returned as `(value, μ)`. Sums run over `n < terms`.
pub fn eta_alpha(inf: &Infinitesimals, u: &SolutionJet, alpha: f64, x: f64, t: f64, terms: usize) -> Result<(f64, f64)> {
    let len = DEFAULT_TAYLOR_LEN;
    let n_max = terms.max(1);
    let ue = u.function().expr().clone();
    let ux = ue.diff(Var::X);
    let u0 = taylor(&ue, x, t, 1)?.value();
    let eta = inf.eta();
    let eta_u = eta.diff(Var::U);

    let mut value = rl(&freeze(eta, x, u0), x, alpha, t, len)?;
    let tau_d = derivatives(&substitute(inf.tau(), &ue), x, t, n_max)?;
    let eta_u_here = taylor(&substitute(&eta_u, &ue), x, t, 1)?.value();
    value += (eta_u_here - alpha * tau_d[1]) * rl(&ue, x, alpha, t, len)?;
    value -= u0 * rl(&freeze(&eta_u, x, u0), x, alpha, t, len)?;

    let xi_d = derivatives(&substitute(inf.xi(), &ue), x, t, n_max)?;
    let eta_u_d = derivatives(&freeze(&eta_u, x, u0), x, t, n_max)?;
    for n in 1..n_max {
        let b = alpha - n as f64;
        value -= gen_binom(alpha, n) * xi_d[n] * rl(&ux, x, b, t, len)?;
        let c = gen_binom(alpha, n) * eta_u_d[n] - gen_binom(alpha, n + 1) * tau_d[n + 1];
        value += c * rl(&ue, x, b, t, len)?;
    }

    // μ over 2 ≤ k ≤ m ≤ n < terms
    let mut mu = 0.0;
    let top = n_max.saturating_sub(1);
    let mut eta_k = eta_u;
    for k in 2..=top {
        eta_k = eta_k.diff(Var::U);
        if eta_k.is_zero() {
            continue;
        }
        let ek = derivatives(&freeze(&eta_k, x, u0), x, t, top)?;
        let pow_d: Vec<Vec<f64>> =
            (0..=k).map(|q| derivatives(&ue.clone().powf(q as f64), x, t, top)).collect::<Result<_>>()?;
        for n in k..=top {
            let cn = gen_binom(alpha, n) * t.powf(n as f64 - alpha) * rgamma(n as f64 + 1.0 - alpha);
            for m in k..=n {
                let mut inner = 0.0;
                for r in 0..k {
                    inner += binom_usize(k, r) * (-u0).powi(r as i32) * pow_d[k - r][m];
                }
                mu += cn * binom_usize(n, m) / factorial(k) * inner * ek[n - m];
            }
        }
    }
    Ok((value + mu, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::special::gamma;

    #[test]
    fn power_rule_on_monomials() {
        // D^{1/2} t = t^{1/2}/Γ(3/2)
        let v = rl(&parse("t").unwrap(), 0.0, 0.5, 0.7, 8).unwrap();
        assert!((v - 0.7f64.sqrt() / gamma(1.5).unwrap()).abs() < 1e-14);
        // derivatives of constants of integer order vanish
        assert_eq!(rl(&parse("3").unwrap(), 0.0, 1.0, 0.7, 8).unwrap(), 0.0);
        // I^1 t^2 = t^3/3
        let v = rl(&parse("t^2").unwrap(), 0.0, -1.0, 0.6, 8).unwrap();
        assert!((v - 0.072).abs() < 1e-15);
    }

    #[test]
    fn taylor_series_of_exponential() {
        let v = rl(&parse("exp(t)").unwrap(), 0.0, -1.0, 0.5, 30).unwrap();
        assert!((v - (0.5f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_generator_gives_zero() {
        let u = SolutionJet::parse("1 + x*t").unwrap();
        let (v, mu) = eta_alpha(&Infinitesimals::zero(), &u, 0.5, 0.3, 0.8, 10).unwrap();
        assert_eq!((v, mu), (0.0, 0.0));
    }
}
