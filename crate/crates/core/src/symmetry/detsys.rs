//! The determining systems. Each evaluator streams signed residuals
//! `(equation, node, value)` into a sink; reports keep the max-abs per
//! equation and the ansatz solver keeps the raw vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    eval_node, Accumulator, EquationKind, EvolutionEquation, GeneratorCandidate, Node, NodeEnv, ResidualReport,
    SystemSetup,
};
use super::powersum::frac_derivative_expr;
use crate::classical;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::jet::SolutionJet;
use crate::prolong::{commutator, eta_integer_expr, Infinitesimals, ReducedInfinitesimals};
use crate::psi::{Builtin, PsiFunction};
use crate::special::gen_binom;

pub(crate) type Sink<'a> = dyn FnMut(usize, Node, f64) -> Result<()> + 'a;

/// Polynomial probe `u = Σ_{k≤3} c_k P^k` with seeded coefficients in `[0.5, 1.5)`.
pub fn probe_jet(seed: u64) -> SolutionJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = Expr::zero();
    for k in 0..=3 {
        let c: f64 = rng.random_range(0.5..1.5);
        e = e + Expr::Const(c) * Expr::psi().powf(k as f64);
    }
    SolutionJet::new(crate::jet::JetFunction::new(e)).expect("probe has no jet variables")
}

fn freeze_x(e: &Expr, x: f64) -> Expr {
    e.subst(Var::X, &Expr::Const(x))
}

/// `σ(a) [D^{α;ψ}, D_s] u_probe` per time node; zero without terminal motion.
fn omega_column(sigma_a: f64, setup: &SystemSetup) -> Result<Vec<f64>> {
    if sigma_a == 0.0 {
        return Ok(vec![0.0; setup.grid.t.len()]);
    }
    let probe = probe_jet(setup.seed).slice(0, 0.0)?;
    setup.grid.t.iter().map(|&t| Ok(sigma_a * commutator(&probe, &setup.spec, t)?)).collect()
}

fn for_nodes(setup: &SystemSetup, mut f: impl FnMut(usize, usize, Node) -> Result<()>) -> Result<()> {
    for &x in &setup.grid.x {
        for (it, &t) in setup.grid.t.iter().enumerate() {
            for (iu, &u) in setup.grid.u.iter().enumerate() {
                f(it, iu, Node { x, t, u })?;
            }
        }
    }
    Ok(())
}

pub(crate) const GFBE_EQUATIONS: [&str; 5] = ["(i)", "(ii)", "(iii)", "(iv)", "(v)"];

/// Generalized Burgers `D^{α;ψ} u = g(u) u_x + u_xx`:
/// (i) `D^{α;ψ}ρ − ρ_xx`, (ii) `α D_sσ − 2ξ′`, (iii) `(θ′u + ρ_x) g + θ″u`,
/// (iv) `(α D_sσ − ξ′) g + η g′ + 2θ′ − ξ″`, (v) `ω`.
pub(crate) fn gfbe_eval(r: &ReducedInfinitesimals, gamma: bool, g: &Expr, setup: &SystemSetup, sink: &mut Sink) -> Result<()> {
    let psi = setup.psi();
    let alpha = setup.alpha();
    let xi1 = r.xi.diff(Var::X);
    let xi2 = xi1.diff(Var::X);
    let th1 = r.theta.diff(Var::X);
    let th2 = th1.diff(Var::X);
    let rho_x = r.rho.diff(Var::X);
    let rho_xx = rho_x.diff(Var::X);
    let g1 = g.diff(Var::U);
    let ds = r.sigma_prime();
    let eta = r.eta_with_gamma(alpha, gamma);
    let e2 = Expr::Const(alpha) * ds.clone() - Expr::Const(2.0) * xi1.clone();
    let e3 = (th1.clone() * Expr::u() + rho_x) * g.clone() + th2 * Expr::u();
    let e4 = (Expr::Const(alpha) * ds - xi1) * g.clone() + eta * g1 + Expr::Const(2.0) * th1 - xi2;
    let omega = omega_column(r.c0, setup)?;
    let mut e1_cache = vec![0.0; setup.grid.t.len()];
    for_nodes(setup, |it, iu, n| {
        if iu == 0 {
            let rho = freeze_x(&r.rho, n.x);
            e1_cache[it] = if rho.is_zero() { 0.0 } else { frac_derivative_expr(&rho, &setup.spec, n.t)? }
                - eval_node(&rho_xx, n, psi)?;
        }
        sink(0, n, e1_cache[it])?;
        sink(1, n, eval_node(&e2, n, psi)?)?;
        sink(2, n, eval_node(&e3, n, psi)?)?;
        sink(3, n, eval_node(&e4, n, psi)?)?;
        sink(4, n, omega[it])
    })
}

fn report(system: &str, cand: &GeneratorCandidate, names: Vec<String>, setup: &SystemSetup, run: impl FnOnce(&mut Sink) -> Result<()>) -> Result<ResidualReport> {
    let mut acc = Accumulator::new(names);
    run(&mut |eq, n, v| acc.push(eq, v, n))?;
    Ok(acc.finish(system, &cand.label, setup))
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn detsys_gfbe(cand: &GeneratorCandidate, g: &Expr, setup: &SystemSetup) -> Result<ResidualReport> {
    let r = cand.require_reduced()?;
    EvolutionEquation::new(EquationKind::Gfbe { g: g.clone() })?;
    setup.grid.check(setup.psi())?;
    report("gfbe", cand, names(&GFBE_EQUATIONS), setup, |sink| gfbe_eval(r, r.gamma_active(), g, setup, sink))
}

pub(crate) fn diffusion_names(k: &Expr) -> Vec<String> {
    if k.diff(Var::U).is_zero() {
        names(&["(i)", "(ii)", "(iv)", "(v)"])
    } else {
        names(&["(i)", "(ii)", "(iii)", "(iv)", "(v)"])
    }
}

/// Nonlinear diffusion `D^{α;ψ} u = (K(u) u_x)_x`:
/// (i) `(θ″u + ρ_xx) K − D^{α;ψ}ρ`, (ii) `K′η + K(α D_sσ − 2ξ′)`,
/// (iii) `ηK″ + (α D_sσ − 2ξ′ + η_u) K′`, (iv) `K(2θ′ − ξ″) + 2K′(θ′u + ρ_x)`, (v) `ω`.
/// When `K′ ≡ 0` equation (iii) is absent and the others lose their `K′` terms.
pub(crate) fn diffusion_eval(r: &ReducedInfinitesimals, gamma: bool, k: &Expr, setup: &SystemSetup, sink: &mut Sink) -> Result<()> {
    let psi = setup.psi();
    let alpha = setup.alpha();
    let k1 = k.diff(Var::U);
    let constant = k1.is_zero();
    let k2 = k1.diff(Var::U);
    let xi1 = r.xi.diff(Var::X);
    let xi2 = xi1.diff(Var::X);
    let th1 = r.theta.diff(Var::X);
    let th2 = th1.diff(Var::X);
    let rho_x = r.rho.diff(Var::X);
    let rho_xx = rho_x.diff(Var::X);
    let eta = r.eta_with_gamma(alpha, gamma);
    let eta_u = eta.diff(Var::U);
    let scale = Expr::Const(alpha) * r.sigma_prime() - Expr::Const(2.0) * xi1;
    let e1_local = (th2 * Expr::u() + rho_xx) * k.clone();
    let e2 = k1.clone() * eta.clone() + k.clone() * scale.clone();
    let e3 = eta * k2 + (scale + eta_u) * k1.clone();
    let e4 = k.clone() * (Expr::Const(2.0) * th1.clone() - xi2) + Expr::Const(2.0) * k1 * (th1 * Expr::u() + rho_x);
    let omega = omega_column(r.c0, setup)?;
    let mut frac_cache = vec![0.0; setup.grid.t.len()];
    let last = if constant { 3 } else { 4 };
    for_nodes(setup, |it, iu, n| {
        if iu == 0 {
            let rho = freeze_x(&r.rho, n.x);
            frac_cache[it] = if rho.is_zero() { 0.0 } else { frac_derivative_expr(&rho, &setup.spec, n.t)? };
        }
        sink(0, n, eval_node(&e1_local, n, psi)? - frac_cache[it])?;
        sink(1, n, eval_node(&e2, n, psi)?)?;
        if constant {
            sink(2, n, eval_node(&e4, n, psi)?)?;
        } else {
            sink(2, n, eval_node(&e3, n, psi)?)?;
            sink(3, n, eval_node(&e4, n, psi)?)?;
        }
        sink(last, n, omega[it])
    })
}

pub fn detsys_diffusion(cand: &GeneratorCandidate, k: &Expr, setup: &SystemSetup) -> Result<ResidualReport> {
    let r = cand.require_reduced()?;
    EvolutionEquation::new(EquationKind::Diffusion { k: k.clone() })?;
    let alpha = setup.alpha();
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Invalid(format!("diffusion system needs 0 < α ≤ 2, got {alpha}")));
    }
    setup.grid.check(setup.psi())?;
    report("diffusion", cand, diffusion_names(k), setup, |sink| diffusion_eval(r, r.gamma_active(), k, setup, sink))
}

fn require_classical(psi: &PsiFunction) -> Result<()> {
    if psi.family() != Some(Builtin::Identity) || psi.a() != 0.0 {
        return Err(Error::Invalid("classical systems need ψ(t) = t with a = 0".into()));
    }
    Ok(())
}

fn freeze_xu(e: &Expr, n: Node) -> Expr {
    e.map_vars(&|v| match v {
        Var::X => Some(Expr::Const(n.x)),
        Var::U => Some(Expr::Const(n.u)),
        _ => None,
    })
}

/// Classical Burgers-type system with general infinitesimals, `ψ = t`, `a = 0`:
/// `ξ_u = ξ_t = τ_u = τ_x = η_uu = 0`, `τ(0) = 0`,
/// `binom(α,n) ∂_t^n η_u − binom(α,n+1) ∂_t^{n+1} τ = 0` for `1 ≤ n ≤ N`,
/// `ξ_xx − α g τ_t − 2η_xu + g ξ_x − η g′ = 0`, `2ξ_x − α τ_t = 0` and
/// `∂_t^α η − u ∂_t^α η_u − η_xx − g η_x = 0`.
pub fn detsys_gazizov_rl(inf: &Infinitesimals, label: &str, g: &Expr, setup: &SystemSetup) -> Result<ResidualReport> {
    let psi = setup.psi();
    require_classical(psi)?;
    EvolutionEquation::new(EquationKind::Gfbe { g: g.clone() })?;
    setup.grid.check(psi)?;
    let alpha = setup.alpha();
    let n_family = setup.spec.terms.max(1);
    let mut list = names(&["xi_u", "xi_t", "tau_u", "tau_x", "eta_uu", "tau_at_a"]);
    list.extend((1..=n_family).map(|n| format!("family_{n}")));
    list.extend(names(&["u_x", "u_xx", "remainder"]));
    let (xi, tau, eta) = (inf.xi(), inf.tau(), inf.eta());
    let simple = [xi.diff(Var::U), xi.diff(Var::T), tau.diff(Var::U), tau.diff(Var::X), eta.diff_n(Var::U, 2)];
    let eta_u = eta.diff(Var::U);
    let g1 = g.diff(Var::U);
    let ux = xi.diff_n(Var::X, 2) - Expr::Const(alpha) * g.clone() * tau.diff(Var::T) - Expr::Const(2.0) * eta_u.diff(Var::X)
        + g.clone() * xi.diff(Var::X)
        - eta.clone() * g1;
    let uxx = Expr::Const(2.0) * xi.diff(Var::X) - Expr::Const(alpha) * tau.diff(Var::T);
    let local = eta.diff_n(Var::X, 2) + g.clone() * eta.diff(Var::X);
    // with a = 0 and ψ = t the kernel variable is t itself
    let as_kernel = |e: &Expr| e.subst(Var::T, &Expr::psi());
    let cand = GeneratorCandidate::general(label, inf.clone());
    report("gazizov", &cand, list, setup, |sink| {
        for_nodes(setup, |_, _, n| {
            for (i, e) in simple.iter().enumerate() {
                sink(i, n, eval_node(e, n, psi)?)?;
            }
            let at_a = Node { t: psi.a(), ..n };
            sink(5, n, freeze_xu(tau, n).eval_with(&NodeEnv { x: n.x, t: at_a.t, p: 0.0, psi, jets: &|_, _| None })?)?;
            let eta_u_d = classical::derivatives(&freeze_xu(&eta_u, n), n.x, n.t, n_family)?;
            let tau_d = classical::derivatives(&freeze_xu(tau, n), n.x, n.t, n_family + 1)?;
            for k in 1..=n_family {
                let v = gen_binom(alpha, k) * eta_u_d[k] - gen_binom(alpha, k + 1) * tau_d[k + 1];
                sink(5 + k, n, v)?;
            }
            let base = 6 + n_family;
            sink(base, n, eval_node(&ux, n, psi)?)?;
            sink(base + 1, n, eval_node(&uxx, n, psi)?)?;
            let de = frac_derivative_expr(&as_kernel(&freeze_xu(eta, n)), &setup.spec, n.t)?;
            let eu = as_kernel(&freeze_xu(&eta_u, n));
            let deu = if eu.is_zero() { 0.0 } else { frac_derivative_expr(&eu, &setup.spec, n.t)? };
            sink(base + 2, n, de - n.u * deu - eval_node(&local, n, psi)?)
        })
    })
}

/// Jet values of the two fixed probe sets; `u` itself comes from the node.
fn probe_value(set: usize, i: u8, j: u8) -> f64 {
    let (i, j) = (i as f64, j as f64);
    match set {
        0 => 0.3 + 0.17 * i - 0.11 * j,
        _ => -0.45 + 0.23 * i + 0.07 * j,
    }
}

/// Classical system for `D^α u = H(x, t, u, u_x, …) + S(x, t)` with reduced
/// generators `τ = c2 t² + c1 t`:
/// `D^αρ + (η_u − α τ′) S − ξ S_x − τ S_t − Σ_V H_{u_i} ∂_x^i ρ = 0` and
/// `(η_u − α τ′) H − ξ H_x − τ H_t − Σ_V H_{u_i}(η^{(i)} − ∂_x^i ρ) − Σ_{W∖V} H_{u_i} η^{(i)} = 0`,
/// the latter sampled on two fixed jet probes. `τ(0) = 0` is reported too.
pub fn detsys_zhang_rl(cand: &GeneratorCandidate, eq: &EvolutionEquation, setup: &SystemSetup) -> Result<ResidualReport> {
    let r = cand.require_reduced()?;
    let psi = setup.psi();
    require_classical(psi)?;
    setup.grid.check(psi)?;
    let alpha = setup.alpha();
    let inf = r.to_infinitesimals(alpha);
    let (xi, tau, eta) = (inf.xi(), inf.tau(), inf.eta());
    let eta_u = eta.diff(Var::U);
    let tau_t = tau.diff(Var::T);
    let shift = eta_u.clone() - Expr::Const(alpha) * tau_t;
    let (h, s) = (eq.h(), eq.s());
    let mut e1_local = shift.clone() * s.clone() - xi.clone() * s.diff(Var::X) - tau.clone() * s.diff(Var::T);
    let mut e2 = shift * h.clone() - xi.clone() * h.diff(Var::X) - tau.clone() * h.diff(Var::T);
    for c in eq.terms() {
        let hu = h.diff(Var::Jet(c.i as u8, 0));
        let eta_i = if c.i == 0 { eta.clone() } else { eta_integer_expr(c.i, &inf) };
        if c.linear {
            let rho_i = r.rho.diff_n(Var::X, c.i);
            e1_local = e1_local - hu.clone() * rho_i.clone();
            e2 = e2 - hu * (eta_i - rho_i);
        } else {
            e2 = e2 - hu * eta_i;
        }
    }
    let list = names(&["(1)", "(2)", "tau_at_a"]);
    report("zhang", cand, list, setup, |sink| {
        let mut frac_cache = vec![0.0; setup.grid.t.len()];
        for_nodes(setup, |it, iu, n| {
            if iu == 0 {
                let rho = freeze_x(&r.rho, n.x);
                frac_cache[it] = if rho.is_zero() { 0.0 } else { frac_derivative_expr(&rho, &setup.spec, n.t)? };
            }
            sink(0, n, frac_cache[it] + eval_node(&e1_local, n, psi)?)?;
            let p = psi.kernel(n.t)?;
            for set in 0..2 {
                let jets = |i: u8, j: u8| Some(if (i, j) == (0, 0) { n.u } else { probe_value(set, i, j) });
                sink(1, n, e2.eval_with(&NodeEnv { x: n.x, t: n.t, p, psi, jets: &jets })?)?;
            }
            sink(2, n, r.c0)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::prolong::ProlongSpec;

    fn setup(psi: PsiFunction) -> SystemSetup {
        SystemSetup::standard(ProlongSpec::new(psi, 0.5).unwrap())
    }

    fn reduced(xi: &str, c: [f64; 3], theta: &str, rho: &str) -> GeneratorCandidate {
        GeneratorCandidate::reduced("c", ReducedInfinitesimals::new(parse(xi).unwrap(), c, parse(theta).unwrap(), parse(rho).unwrap()).unwrap())
    }

    #[test]
    fn translation_is_exact_for_any_g() {
        let s = setup(PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap());
        for g in ["u", "exp(2*u)", "u^3 + u"] {
            let rep = detsys_gfbe(&reduced("1", [0.0; 3], "0", "0"), &parse(g).unwrap(), &s).unwrap();
            assert_eq!(rep.max_residual(), 0.0);
            assert!(rep.pass);
        }
    }

    #[test]
    fn scaling_for_burgers_and_sign_flip() {
        let s = setup(PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 0.5, 2.0).unwrap());
        let g = parse("u").unwrap();
        let ok = detsys_gfbe(&reduced("x", [0.0, 4.0, 0.0], "-1", "0"), &g, &s).unwrap();
        assert!(ok.max_residual() < 1e-10, "{ok:?}");
        let bad = detsys_gfbe(&reduced("x", [0.0, 4.0, 0.0], "1", "0"), &g, &s).unwrap();
        assert_eq!(bad.failing(), vec!["(iv)"]);
        assert!(bad.residual("(iv)").unwrap() >= 0.1);
    }

    #[test]
    fn terminal_motion_shows_in_omega() {
        let s = setup(PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap());
        let rep = detsys_gfbe(&reduced("1", [1.0, 0.0, 0.0], "0", "0"), &parse("u").unwrap(), &s).unwrap();
        assert!(rep.residual("(v)").unwrap() >= 1e-3);
    }

    #[test]
    fn constant_diffusivity_drops_second_derivative_equation() {
        let s = setup(PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap());
        let rep = detsys_diffusion(&reduced("0", [0.0; 3], "1", "0"), &parse("1").unwrap(), &s).unwrap();
        assert_eq!(rep.equations.len(), 4);
        assert_eq!(rep.max_residual(), 0.0);
    }

    #[test]
    fn quadratic_time_generator_breaks_the_family() {
        let s = setup(PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap());
        let inf = Infinitesimals::parse("0", "t^2", "0").unwrap();
        let rep = detsys_gazizov_rl(&inf, "t^2", &parse("u").unwrap(), &s).unwrap();
        assert!(rep.residual("family_1").unwrap() > 0.1);
    }

    #[test]
    fn classical_systems_refuse_other_kernels() {
        let s = setup(PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap());
        let inf = Infinitesimals::parse("1", "0", "0").unwrap();
        assert!(detsys_gazizov_rl(&inf, "x", &parse("u").unwrap(), &s).is_err());
    }

    #[test]
    fn probe_is_seeded() {
        let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap();
        let a = probe_jet(7).eval(0, 0, 0.0, 0.9, &psi).unwrap();
        assert_eq!(a, probe_jet(7).eval(0, 0, 0.0, 0.9, &psi).unwrap());
        assert_ne!(a, probe_jet(8).eval(0, 0, 0.0, 0.9, &psi).unwrap());
    }
}
