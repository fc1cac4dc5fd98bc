use psifrac::classical;
use psifrac::expr::{parse, Expr};
use psifrac::fracops::{frac_derivative, QuadratureSpec};
use psifrac::jet::{JetFunction, SolutionJet};
use psifrac::prolong::{compact_form, eta_alpha_psi, eta_m_psi, mu_term, omega_term, Infinitesimals, ProlongSpec};
use psifrac::psi::{Builtin, PsiFunction};
use psifrac::special::rgamma;

fn kernels() -> Vec<PsiFunction> {
    vec![
        PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap(),
        PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 1.0, 2.5).unwrap(),
        PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap(),
    ]
}

fn slice_rl(jet: &SolutionJet, x: f64, spec: &ProlongSpec, t: f64) -> f64 {
    frac_derivative(&jet.slice(0, x).unwrap(), &spec.psi, spec.order, t, spec.quad, None).unwrap()
}

#[test]
fn compact_and_expanded_forms_agree() {
    let jets = ["1 + x*psi + psi^2", "x^2*psi^3 + psi - 2"];
    let gens = [("x", "psi", "x*u + psi"), ("1 + x^2", "2*psi^2", "-u"), ("0", "psi*x", "psi^2*u + x")];
    for psi in kernels() {
        let a = psi.a();
        for alpha in [0.5, 1.5] {
            let spec = ProlongSpec::new(psi.clone(), alpha).unwrap();
            for (xi, sigma, eta) in gens {
                let inf = Infinitesimals::from_sigma(parse(xi).unwrap(), parse(sigma).unwrap(), parse(eta).unwrap()).unwrap();
                for src in jets {
                    let jet = SolutionJet::parse(src).unwrap();
                    for t in [a + 0.4, a + 0.9] {
                        let full = eta_alpha_psi(&inf, &jet, &spec, 0.7, t).unwrap();
                        let compact = compact_form(&inf, &jet, &spec, 0.7, t, true).unwrap();
                        assert_eq!(full.omega, 0.0);
                        assert!((full.value - compact).abs() <= 1e-5, "{} alpha={alpha} {xi},{sigma},{eta} on {src}: {} vs {compact}", psi.expr(), full.value);
                    }
                }
            }
        }
    }
}

#[test]
fn time_dilation_follows_homogeneity() {
    // P ↦ e^ε P scales D^{α;ψ} by e^{−αε}, so the coefficient is −α D^{α;ψ} u.
    let jet = SolutionJet::parse("1 + x*psi + psi^2*exp(t)").unwrap();
    let inf = Infinitesimals::from_sigma(Expr::zero(), Expr::psi(), Expr::zero()).unwrap();
    for psi in kernels() {
        for alpha in [0.3, 0.5, 1.5] {
            let spec = ProlongSpec::new(psi.clone(), alpha).unwrap();
            for t in [psi.a() + 0.5, psi.a() + 1.0] {
                let got = eta_alpha_psi(&inf, &jet, &spec, 0.4, t).unwrap().value;
                let want = -alpha * slice_rl(&jet, 0.4, &spec, t);
                assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{} alpha={alpha} t={t}: {got} vs {want}", psi.expr());
            }
        }
    }
}

#[test]
fn quadratic_flow_matches_derivative_of_square() {
    // u ↦ u/(1 − εu) has generator u² ∂u and leaves (x, t) fixed.
    let inf = Infinitesimals::parse("0", "0", "u^2").unwrap();
    for psi in [PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap(), PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap()] {
        for src in ["1 + x*t + t^2", "exp(x*t) + psi"] {
            let jet = SolutionJet::parse(src).unwrap();
            let square = SolutionJet::new(JetFunction::new(jet.function().expr().clone().powf(2.0))).unwrap();
            for alpha in [0.5, 1.5] {
                let spec = ProlongSpec::new(psi.clone(), alpha).unwrap();
                for t in [0.3, 0.8] {
                    let p = eta_alpha_psi(&inf, &jet, &spec, 0.6, t).unwrap();
                    let want = slice_rl(&square, 0.6, &spec, t);
                    assert!(p.mu.abs() > 1e-3, "mu should carry the nonlinearity");
                    assert!((p.value - want).abs() <= 1e-6 * want.abs().max(1.0), "{src} alpha={alpha} t={t}: {} vs {want}", p.value);
                }
            }
        }
    }
}

#[test]
fn mu_vanishes_for_linear_eta_only() {
    let psi = PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 1.0, 2.5).unwrap();
    let spec = ProlongSpec::new(psi, 0.5).unwrap();
    let jet = SolutionJet::parse("exp(x)*psi^2 + psi + 1").unwrap();
    for eta in ["u", "x*u - psi", "exp(t)*u + x^2"] {
        let inf = Infinitesimals::parse("x", "t", eta).unwrap();
        assert!(mu_term(&inf, &jet, &spec, 0.5, 1.6, 10).unwrap().abs() <= 1e-12, "{eta}");
    }
    let inf = Infinitesimals::parse("0", "0", "u^2").unwrap();
    assert!(mu_term(&inf, &jet, &spec, 0.5, 1.6, 10).unwrap().abs() > 1e-3);
}

#[test]
fn omega_matches_the_constant_part_commutator() {
    // [D^{α;ψ}, D_s] P^β = 0 for β > 0; a constant c leaves −c P^{−α−1}/Γ(−α).
    let jet = SolutionJet::parse("2.5 + psi + x*psi^2").unwrap();
    let inf = Infinitesimals::parse("0", "1", "0").unwrap();
    for psi in kernels() {
        for alpha in [0.3, 0.5, 0.8] {
            let spec = ProlongSpec::new(psi.clone(), alpha).unwrap();
            for t in [psi.a() + 0.5, psi.a() + 0.9] {
                let p = psi.kernel(t).unwrap();
                let want = psi.deriv(psi.a()).unwrap() * -2.5 * p.powf(-alpha - 1.0) * rgamma(-alpha);
                let got = omega_term(&inf, &jet, &spec, 0.3, t).unwrap();
                assert!((got - want).abs() <= 1e-5 * want.abs(), "{} alpha={alpha} t={t}: {got} vs {want}", psi.expr());
            }
        }
    }
}

#[test]
fn omega_is_exactly_zero_without_terminal_motion() {
    let jet = SolutionJet::parse("2.5 + psi + x*psi^2").unwrap();
    let spec = ProlongSpec::new(PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap(), 0.5).unwrap();
    for (xi, tau, eta) in [("x", "t", "u"), ("1", "t^2 - t*x", "u^2"), ("0", "0", "0")] {
        let inf = Infinitesimals::parse(xi, tau, eta).unwrap();
        assert_eq!(omega_term(&inf, &jet, &spec, 0.5, 0.9).unwrap(), 0.0);
    }
}

/// Least-squares slope of `log |r(ε)|` against `log ε`.
fn order(eps: &[f64], r: impl Fn(f64) -> f64) -> f64 {
    let vals: Vec<f64> = eps.iter().map(|&e| r(e).abs()).collect();
    if vals.iter().all(|v| *v <= 1e-15) {
        // exact at first order
        return f64::INFINITY;
    }
    let n = eps.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = eps.iter().zip(&vals).map(|(e, v)| (e.ln(), v.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn first_order_expansion_of_transformed_derivative() {
    let alpha = 0.5;
    let m = 1.0;
    let (x, src) = (0.6, "1 + x*t + t^2*exp(x)");
    let jet = SolutionJet::parse(src).unwrap();
    let eps = [1e-2, 1e-3, 1e-4];

    // time dilation with u scaling: t̄ = e^ε t, ā = e^ε a, ū = e^ε u
    for psi in [PsiFunction::builtin(Builtin::Exponential, 0.5, 2.0).unwrap(), PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 0.5, 2.0).unwrap()] {
        let (a, t) = (psi.a(), 1.1);
        let inf = Infinitesimals::parse("0", "t", "u").unwrap();
        let ut = jet.eval(0, 1, x, t, &psi).unwrap();
        let p = psi.kernel(t).unwrap();
        let (dp, dpa) = (psi.deriv(t).unwrap(), psi.deriv(a).unwrap());
        let eta1 = eta_m_psi(1, &inf, &jet, x, t, &psi).unwrap();
        let residual = |e: f64| {
            let tb = e.exp() * t;
            let lhs = (psi.eval(tb).unwrap() - psi.eval(e.exp() * a).unwrap()).powf(m - alpha) * ut / psi.deriv(tb).unwrap();
            let rhs = p.powf(m - alpha) * (1.0 + e * (m - alpha) * (dp * t - dpa * a) / p) * (ut / dp + e * eta1);
            lhs - rhs
        };
        let k = order(&eps, residual);
        assert!(k >= 1.9, "{}: order {k}", psi.expr());
    }

    // joint translation: x̄ = x + ε, t̄ = t + ε, ā = a + ε
    for psi in [PsiFunction::builtin(Builtin::Identity, 0.0, 2.0).unwrap(), PsiFunction::builtin(Builtin::Exponential, 0.0, 2.0).unwrap()] {
        let (a, t) = (psi.a(), 0.8);
        let inf = Infinitesimals::parse("1", "1", "0").unwrap();
        let ut = jet.eval(0, 1, x, t, &psi).unwrap();
        let p = psi.kernel(t).unwrap();
        let (dp, dpa) = (psi.deriv(t).unwrap(), psi.deriv(a).unwrap());
        let eta1 = eta_m_psi(1, &inf, &jet, x, t, &psi).unwrap();
        let residual = |e: f64| {
            let lhs = (psi.eval(t + e).unwrap() - psi.eval(a + e).unwrap()).powf(m - alpha) * ut / psi.deriv(t + e).unwrap();
            let rhs = p.powf(m - alpha) * (1.0 + e * (m - alpha) * (dp - dpa) / p) * (ut / dp + e * eta1);
            lhs - rhs
        };
        let k = order(&eps, residual);
        assert!(k >= 1.9, "{}: order {k}", psi.expr());
    }
}

#[test]
fn classical_expansion_on_fresh_generators() {
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap();
    let mut spec = ProlongSpec::new(psi, 0.7).unwrap();
    spec.quad = QuadratureSpec::new(80).unwrap();
    let inf = Infinitesimals::parse("x^2", "t^2 + x*t", "u*exp(t) + u^2 - x").unwrap();
    let jet = SolutionJet::parse("2 + x*t^2 + exp(t)").unwrap();
    for t in [0.3, 0.6, 1.1] {
        let v = eta_alpha_psi(&inf, &jet, &spec, 0.5, t).unwrap();
        let (c, mu) = classical::eta_alpha(&inf, &jet, 0.7, 0.5, t, spec.terms).unwrap();
        assert!((v.value - c).abs() <= 1e-8 * c.abs().max(1.0), "t={t}: {} vs {c}", v.value);
        assert!((v.mu - mu).abs() <= 1e-8 * mu.abs().max(1.0));
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn linear_eta_has_no_mu(c in proptest::collection::vec(-2.0f64..2.0, 4), x in 0.2f64..1.0, s in 0.2f64..1.0) {
            let psi = PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5).unwrap();
            let spec = ProlongSpec::new(psi, 0.5).unwrap();
            let eta = format!("({})*u + ({})*x*psi*u + ({})*t + ({})", c[0], c[1], c[2], c[3]);
            let inf = Infinitesimals::parse("x", "t^2", &eta).unwrap();
            let jet = SolutionJet::parse("1 + x*psi + psi^3").unwrap();
            prop_assert!(mu_term(&inf, &jet, &spec, x, s, 10).unwrap().abs() <= 1e-12);
            prop_assert_eq!(omega_term(&inf, &jet, &spec, x, s).unwrap(), 0.0);
        }

        #[test]
        fn terminal_motion_shows_in_omega(c in 0.2f64..3.0, s in 0.3f64..1.0) {
            let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap();
            let spec = ProlongSpec::new(psi, 0.5).unwrap();
            let inf = Infinitesimals::parse("0", &format!("{c}"), "0").unwrap();
            let jet = SolutionJet::parse("2 + x*psi").unwrap();
            prop_assert!(omega_term(&inf, &jet, &spec, 0.5, s).unwrap().abs() >= 1e-3);
        }
    }
}
