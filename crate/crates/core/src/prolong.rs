//! Prolongation of a point generator to the ψ-fractional time derivative.
//!
//! A generator is `ξ ∂x + τ ∂t + η ∂u`. Its component along `∂/∂ψ` is
//! `σ = τ ψ′(t)`, and every ψ-derivative `D_s = (1/ψ′) d/dt` of the time
//! component acts on `σ`. Derivatives written `∂_s` hold `x` and `u` fixed
//! at the evaluation point; `D_s` differentiates along the solution jet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::fracops::{
    fornberg, frac_derivative, frac_derivative_series, rl_operator, FractionalOrder, QuadratureSpec, SeriesValue,
};
use crate::jet::{Along, JetFunction, SolutionJet, TimeFunction};
use crate::psi::PsiFunction;
use crate::special::{binom_usize, factorial, gen_binom, rgamma};

/// General infinitesimals `(ξ, τ, η)` as functions of `x, t, psi, u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Infinitesimals {
    xi: Expr,
    tau: Expr,
    sigma: Expr,
    eta: Expr,
}

fn check_point_vars(name: &str, e: &Expr) -> Result<()> {
    for v in e.vars() {
        if let Var::Jet(i, j) = v {
            if (i, j) != (0, 0) {
                return Err(Error::Invalid(format!("{name} may depend on x, t, psi and u only, found `{}`", v.name())));
            }
        }
    }
    Ok(())
}

impl Infinitesimals {
    /// From the `t`-component `τ`.
    pub fn new(xi: Expr, tau: Expr, eta: Expr) -> Result<Self> {
        for (n, e) in [("xi", &xi), ("tau", &tau), ("eta", &eta)] {
            check_point_vars(n, e)?;
        }
        let sigma = tau.clone().mul(Expr::PsiDeriv(1));
        Ok(Self { xi, tau, sigma, eta })
    }

    /// From the `∂/∂ψ` component `σ = τ ψ′`.
    pub fn from_sigma(xi: Expr, sigma: Expr, eta: Expr) -> Result<Self> {
        for (n, e) in [("xi", &xi), ("sigma", &sigma), ("eta", &eta)] {
            check_point_vars(n, e)?;
        }
        let tau = sigma.clone().div(Expr::PsiDeriv(1));
        Ok(Self { xi, tau, sigma, eta })
    }

    pub fn parse(xi: &str, tau: &str, eta: &str) -> Result<Self> {
        Self::new(crate::expr::parse(xi)?, crate::expr::parse(tau)?, crate::expr::parse(eta)?)
    }

    pub fn zero() -> Self {
        Self { xi: Expr::zero(), tau: Expr::zero(), sigma: Expr::zero(), eta: Expr::zero() }
    }

    pub fn xi(&self) -> &Expr {
        &self.xi
    }

    pub fn tau(&self) -> &Expr {
        &self.tau
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }

    pub fn eta(&self) -> &Expr {
        &self.eta
    }
}

/// The reduced form `ξ(x) ∂x + (c0 + c1 P + c2 P²) ∂ψ + η ∂u` with
/// `P = ψ(t) − ψ(a)` and `η = θ(x) u + ρ(x, P)`, plus `γ (c1 + 2 c2 P) u`
/// with `γ = (α − 1)/2` when `c2 ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedInfinitesimals {
    pub xi: Expr,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub theta: Expr,
    pub rho: Expr,
}

impl ReducedInfinitesimals {
    pub fn new(xi: Expr, c: [f64; 3], theta: Expr, rho: Expr) -> Result<Self> {
        if xi.vars().iter().any(|v| *v != Var::X) {
            return Err(Error::Invalid("xi must depend on x only".into()));
        }
        if theta.vars().iter().any(|v| *v != Var::X) {
            return Err(Error::Invalid("theta must depend on x only".into()));
        }
        if rho.vars().iter().any(|v| !matches!(v, Var::X | Var::P)) {
            return Err(Error::Invalid("rho must depend on x and psi only".into()));
        }
        Ok(Self { xi, c0: c[0], c1: c[1], c2: c[2], theta, rho })
    }

    /// Whether the `γ` term is present.
    pub fn gamma_active(&self) -> bool {
        self.c2 != 0.0
    }

    /// `σ(P) = c0 + c1 P + c2 P²`.
    pub fn sigma(&self) -> Expr {
        let p = Expr::psi();
        Expr::Const(self.c0) + Expr::Const(self.c1) * p.clone() + Expr::Const(self.c2) * p.powf(2.0)
    }

    /// `D_s σ = c1 + 2 c2 P`.
    pub fn sigma_prime(&self) -> Expr {
        Expr::Const(self.c1) + Expr::Const(2.0 * self.c2) * Expr::psi()
    }

    pub fn eta(&self, alpha: f64) -> Expr {
        self.eta_with_gamma(alpha, self.gamma_active())
    }

    /// `η` with the `γ` term switched explicitly; linear solves over the
    /// constants need the switch decoupled from `c2`.
    pub fn eta_with_gamma(&self, alpha: f64, active: bool) -> Expr {
        let mut eta = self.theta.clone() * Expr::u() + self.rho.clone();
        if active {
            let gamma = 0.5 * (alpha - 1.0);
            eta = Expr::Const(gamma) * self.sigma_prime() * Expr::u() + eta;
        }
        eta
    }

    pub fn to_infinitesimals(&self, alpha: f64) -> Infinitesimals {
        Infinitesimals::from_sigma(self.xi.clone(), self.sigma(), self.eta(alpha)).expect("reduced form has no jets")
    }
}

/// Shared evaluation settings.
#[derive(Debug, Clone)]
pub struct ProlongSpec {
    pub psi: PsiFunction,
    pub order: FractionalOrder,
    pub quad: QuadratureSpec,
    /// Truncation of every infinite sum.
    pub terms: usize,
    /// Inner finite-difference step (default when `None`).
    pub step: Option<f64>,
}

impl ProlongSpec {
    pub fn new(psi: PsiFunction, alpha: f64) -> Result<Self> {
        Ok(Self { psi, order: FractionalOrder::new(alpha)?, quad: QuadratureSpec::default(), terms: 20, step: None })
    }

    pub fn alpha(&self) -> f64 {
        self.order.alpha
    }

    fn rl(&self, f: &dyn TimeFunction, order: f64, t: f64) -> Result<f64> {
        rl_operator(f, &self.psi, order, t, self.quad, self.step)
    }
}

/// Components of the extended coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prolongation {
    pub value: f64,
    pub mu: f64,
    pub omega: f64,
    /// Largest magnitude among the last retained terms of the truncated sums.
    pub tail: f64,
}

/// `expr` with `x` and `u` frozen at point values.
fn frozen(expr: &Expr, x: f64, u: f64) -> JetFunction {
    JetFunction::new(expr.map_vars(&|v| match v {
        Var::X => Some(Expr::Const(x)),
        Var::U => Some(Expr::Const(u)),
        _ => None,
    }))
}

fn point_value(expr: &Expr, jet: &SolutionJet, x: f64, t: f64, psi: &PsiFunction) -> Result<f64> {
    Along::new(expr.clone(), x, Some(jet)).value(t, psi.kernel(t)?, psi)
}

/// Fractional total derivative `Σ_{m<N} binom(α, m) P^{m−α}/Γ(m+1−α) D_s^m F`
/// of `expr` composed with the solution jet.
pub fn total_frac_deriv(expr: &Expr, jet: Option<&SolutionJet>, x: f64, spec: &ProlongSpec, t: f64) -> Result<SeriesValue> {
    let f = Along::new(expr.clone(), x, jet);
    frac_derivative_series(&f, &spec.psi, spec.order, t, spec.terms)
}

/// `η^{(i)} = D_x^i(η − ξ u_x − τ u_t) + ξ u_{i+1} + τ u_{it}` with free jet variables.
pub fn eta_integer_expr(i: usize, inf: &Infinitesimals) -> Expr {
    let ux = Expr::var(Var::Jet(1, 0));
    let ut = Expr::var(Var::Jet(0, 1));
    let mut q = inf.eta.clone() - inf.xi.clone() * ux - inf.tau.clone() * ut;
    for _ in 0..i {
        q = q.total_diff_x();
    }
    q + inf.xi.clone() * Expr::var(Var::Jet(i as u8 + 1, 0)) + inf.tau.clone() * Expr::var(Var::Jet(i as u8, 1))
}

/// `η^{(i)}` evaluated on a solution jet.
pub fn eta_integer(i: usize, inf: &Infinitesimals, jet: &SolutionJet, x: f64, t: f64, psi: &PsiFunction) -> Result<f64> {
    point_value(&eta_integer_expr(i, inf), jet, x, t, psi)
}

/// `η^{(m;ψ)} = D_s^m(η − ξ u_x − τ u_t) + ξ D_s^m u_x + σ D_s^{m+1} u`.
pub fn eta_m_psi(m: usize, inf: &Infinitesimals, jet: &SolutionJet, x: f64, t: f64, psi: &PsiFunction) -> Result<f64> {
    let q = inf.eta.clone() - inf.xi.clone() * Expr::var(Var::Jet(1, 0)) - inf.tau.clone() * Expr::var(Var::Jet(0, 1));
    let dq = Along::new(q, x, Some(jet)).psi_jet(t, psi, m)?[m];
    let xi = point_value(&inf.xi, jet, x, t, psi)?;
    let sigma = point_value(&inf.sigma, jet, x, t, psi)?;
    let ux = jet.slice(1, x)?.psi_jet(t, psi, m)?[m];
    let u = jet.slice(0, x)?.psi_jet(t, psi, m + 1)?[m + 1];
    Ok(dq + xi * ux + sigma * u)
}

/// The quadruple sum μ, outer index `m ≤ max_m`:
/// `Σ binom(α,m) binom(m,n) binom(k,r)/k! P^{m−α}/Γ(m+1−α) (−u)^r D_s^n(u^{k−r}) ∂_s^{m−n} ∂_u^k η`
/// over `2 ≤ k ≤ n ≤ m`, `0 ≤ r < k`.
pub fn mu_term(inf: &Infinitesimals, jet: &SolutionJet, spec: &ProlongSpec, x: f64, t: f64, max_m: usize) -> Result<f64> {
    let psi = &spec.psi;
    if max_m < 2 {
        return Ok(0.0);
    }
    let mut du_eta = Vec::with_capacity(max_m + 1);
    let mut e = inf.eta.diff(Var::U);
    du_eta.push(Expr::zero());
    du_eta.push(e.clone());
    for _ in 2..=max_m {
        e = e.diff(Var::U);
        du_eta.push(e.clone());
    }
    if du_eta[2..].iter().all(Expr::is_zero) {
        return Ok(0.0);
    }
    let p = psi.kernel(t)?;
    let chart = psi.chart(t, max_m + 1)?;
    let us = jet.slice(0, x)?.series(&chart)?;
    let u0 = us.value();
    // D_s^n (u^q) for q = 1..=max_m
    let mut powers = vec![crate::series::Series::constant(1.0, max_m + 1)];
    for q in 1..=max_m {
        let next = &powers[q - 1] * &us;
        powers.push(next);
    }
    let alpha = spec.alpha();
    let mut total = 0.0;
    for k in 2..=max_m {
        if du_eta[k].is_zero() {
            continue;
        }
        let partial_jet = frozen(&du_eta[k], x, u0).psi_jet(t, psi, max_m - 2)?;
        for m in k..=max_m {
            let cm = gen_binom(alpha, m) * p.powf(m as f64 - alpha) * rgamma(m as f64 + 1.0 - alpha);
            if cm == 0.0 {
                continue;
            }
            for n in k..=m {
                let mut inner = 0.0;
                for r in 0..k {
                    inner += binom_usize(k, r) * (-u0).powi(r as i32) * powers[k - r].derivative(n);
                }
                total += cm * binom_usize(m, n) / factorial(k) * inner * partial_jet[m - n];
            }
        }
    }
    Ok(total)
}

/// Closed form of the `(D_s u)²` coefficient of μ:
/// `Σ_{m=2}^{M} binom(α,m) binom(m,2) P^{m−α}/Γ(m+1−α) ∂_s^{m−2} η_uu`.
pub fn mu_du2_coefficient(inf: &Infinitesimals, spec: &ProlongSpec, x: f64, u: f64, t: f64, max_m: usize) -> Result<f64> {
    let psi = &spec.psi;
    let alpha = spec.alpha();
    let p = psi.kernel(t)?;
    let etauu = frozen(&inf.eta.diff_n(Var::U, 2), x, u);
    let jet = etauu.psi_jet(t, psi, max_m.saturating_sub(2))?;
    let mut total = 0.0;
    for m in 2..=max_m {
        total += gen_binom(alpha, m) * binom_usize(m, 2) * p.powf(m as f64 - alpha) * rgamma(m as f64 + 1.0 - alpha) * jet[m - 2];
    }
    Ok(total)
}

/// `D_s u` of a time function, pointwise.
struct PsiDerivOf<'a>(&'a dyn TimeFunction);

impl TimeFunction for PsiDerivOf<'_> {
    fn value(&self, t: f64, _p: f64, psi: &PsiFunction) -> Result<f64> {
        Ok(self.0.psi_jet(t, psi, 1)?[1])
    }
}

/// `[D^{α;ψ} D_s − D_s D^{α;ψ}] u` measured numerically: the first ordering
/// applies quadrature plus differencing to the exact `D_s u`, the second
/// differences `D^{α;ψ} u` once more in `v = ψ(t)`.
pub fn commutator(u: &dyn TimeFunction, spec: &ProlongSpec, t: f64) -> Result<f64> {
    let psi = &spec.psi;
    let first = frac_derivative(&PsiDerivOf(u), psi, spec.order, t, spec.quad, spec.step)?;
    let v = psi.eval(t)?;
    let h = 1e-3 * (psi.psi_b() - psi.psi_a());
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let w = fornberg(&offsets, 1);
    let mut second = 0.0;
    for (j, wj) in offsets.iter().zip(&w) {
        if *wj == 0.0 {
            continue;
        }
        let vj = v + j * h;
        if vj > psi.psi_b() {
            return Err(Error::Stencil { lo: v - 2.0 * h, hi: v + 2.0 * h, min: psi.psi_a(), max: psi.psi_b() });
        }
        let tj = psi.inverse(vj)?;
        second += wj * frac_derivative(u, psi, spec.order, tj, spec.quad, spec.step)?;
    }
    Ok(first - second / h)
}

/// `σ` at the lower terminal `t = a`, with `x` and `u` at the point values.
pub fn sigma_at_a(inf: &Infinitesimals, x: f64, u: f64, psi: &PsiFunction) -> Result<f64> {
    frozen(&inf.sigma, x, u).value(psi.a(), 0.0, psi)
}

/// `ω = ψ′(a) τ̃ [D^{α;ψ}, D_s] u = σ(a) [D^{α;ψ}, D_s] u`; exactly zero when `σ(a) = 0`.
pub fn omega_term(inf: &Infinitesimals, jet: &SolutionJet, spec: &ProlongSpec, x: f64, t: f64) -> Result<f64> {
    let u0 = jet.eval(0, 0, x, t, &spec.psi)?;
    let s_a = sigma_at_a(inf, x, u0, &spec.psi)?;
    if s_a == 0.0 {
        return Ok(0.0);
    }
    Ok(s_a * commutator(&jet.slice(0, x)?, spec, t)?)
}

/// The expanded extended coefficient `η^{α;ψ}` including μ and ω.
pub fn eta_alpha_psi(inf: &Infinitesimals, jet: &SolutionJet, spec: &ProlongSpec, x: f64, t: f64) -> Result<Prolongation> {
    let psi = &spec.psi;
    let alpha = spec.alpha();
    let n = spec.terms.max(1);
    let u_slice = jet.slice(0, x)?;
    let ux_slice = jet.slice(1, x)?;
    let u0 = jet.eval(0, 0, x, t, psi)?;
    let eta_u = inf.eta.diff(Var::U);

    let mut value = spec.rl(&frozen(&inf.eta, x, u0), alpha, t)?;
    let sigma_jet = Along::new(inf.sigma.clone(), x, Some(jet)).psi_jet(t, psi, n)?;
    let eta_u0 = point_value(&eta_u, jet, x, t, psi)?;
    let d_alpha_u = spec.rl(&u_slice, alpha, t)?;
    value += (eta_u0 - alpha * sigma_jet[1]) * d_alpha_u;
    let eta_u_frozen = frozen(&eta_u, x, u0);
    if !eta_u.is_zero() {
        value -= u0 * spec.rl(&eta_u_frozen, alpha, t)?;
    }

    let xi_jet = Along::new(inf.xi.clone(), x, Some(jet)).psi_jet(t, psi, n - 1)?;
    let eta_u_jet = eta_u_frozen.psi_jet(t, psi, n - 1)?;
    let mut tail = 0.0f64;
    let mut last_xi = 0.0;
    let mut last_u = 0.0;
    for m in 1..n {
        let order = alpha - m as f64;
        let cx = gen_binom(alpha, m) * xi_jet[m];
        last_xi = if cx != 0.0 { cx * spec.rl(&ux_slice, order, t)? } else { 0.0 };
        value -= last_xi;
        let cu = gen_binom(alpha, m) * eta_u_jet[m] - gen_binom(alpha, m + 1) * sigma_jet[m + 1];
        last_u = if cu != 0.0 { cu * spec.rl(&u_slice, order, t)? } else { 0.0 };
        value += last_u;
    }
    tail = tail.max(last_xi.abs()).max(last_u.abs());
    let mu = mu_term(inf, jet, spec, x, t, n - 1)?;
    let omega = omega_term(inf, jet, spec, x, t)?;
    Ok(Prolongation { value: value + mu + omega, mu, omega, tail })
}

/// Compact form `D^{α;ψ}(η − ξ u_x − τ u_t) + ξ D^{α;ψ} u_x + τ ψ′ D^{α+1;ψ} u + ω`.
/// With `with_psi_prime = false` the last coefficient is `τ` alone.
pub fn compact_form(inf: &Infinitesimals, jet: &SolutionJet, spec: &ProlongSpec, x: f64, t: f64, with_psi_prime: bool) -> Result<f64> {
    let psi = &spec.psi;
    let alpha = spec.alpha();
    let q = inf.eta.clone() - inf.xi.clone() * Expr::var(Var::Jet(1, 0)) - inf.tau.clone() * Expr::var(Var::Jet(0, 1));
    let mut value = spec.rl(&Along::new(q, x, Some(jet)), alpha, t)?;
    let xi = point_value(&inf.xi, jet, x, t, psi)?;
    if xi != 0.0 {
        value += xi * spec.rl(&jet.slice(1, x)?, alpha, t)?;
    }
    let coef = if with_psi_prime { point_value(&inf.sigma, jet, x, t, psi)? } else { point_value(&inf.tau, jet, x, t, psi)? };
    if coef != 0.0 {
        value += coef * spec.rl(&jet.slice(0, x)?, alpha + 1.0, t)?;
    }
    Ok(value + omega_term(inf, jet, spec, x, t)?)
}
