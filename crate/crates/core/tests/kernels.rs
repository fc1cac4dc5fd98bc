use proptest::prelude::*;
use psifrac::psi::{Builtin, PsiFunction};
use psifrac::special::{gamma, gen_binom};

fn builtins() -> Vec<PsiFunction> {
    vec![
        PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap(),
        PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 0.5, 2.0).unwrap(),
        PsiFunction::builtin(Builtin::Power { rho: 0.5 }, 0.2, 3.0).unwrap(),
        PsiFunction::builtin(Builtin::Exponential, -1.0, 1.5).unwrap(),
        PsiFunction::builtin(Builtin::Affine { c: 2.0, d: -1.0 }, 0.0, 1.0).unwrap(),
    ]
}

proptest! {
    #[test]
    fn pascal_identity(alpha in -4.0f64..4.0, m in 0usize..=20) {
        let lhs = gen_binom(alpha, m + 1) + gen_binom(alpha, m);
        let rhs = gen_binom(alpha + 1.0, m + 1);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn binomial_gamma_identity(alpha in 0.05f64..6.0, m in 0usize..=12) {
        // skip the poles of Γ(α − m + 1)
        let z = alpha - m as f64 + 1.0;
        prop_assume!((z - z.round()).abs() > 1e-3 || z > 0.5);
        let lhs = gen_binom(alpha, m) * gamma(z).unwrap() * gamma(m as f64 + 1.0).unwrap();
        let rhs = gamma(alpha + 1.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
    }

    #[test]
    fn numeric_inverse_round_trips(s in 0.0f64..=1.0) {
        for psi in builtins() {
            let t = psi.a() + s * (psi.b() - psi.a());
            let back = psi.invert_numeric(psi.eval(t).unwrap()).unwrap();
            prop_assert!((back - t).abs() <= 1e-10, "{} at {t}: {back}", psi.expr());
        }
    }

    #[test]
    fn kernels_increase(s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
        prop_assume!(s1 != s2);
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        for psi in builtins() {
            let at = |s: f64| psi.eval(psi.a() + s * (psi.b() - psi.a())).unwrap();
            prop_assert!(at(lo) < at(hi));
        }
    }
}

#[test]
fn builtins_validate() {
    for psi in builtins() {
        assert!(psi.validate(64).is_ok(), "{}", psi.expr());
    }
}

#[test]
fn stationary_custom_kernel_is_rejected() {
    // ψ′ vanishes at t = 1
    let psi = PsiFunction::custom(psifrac::expr::parse("(t - 1)^3").unwrap(), 0.0, 2.0, None).unwrap();
    let v = psi.validate(33).unwrap_err();
    assert!((v.t() - 1.0).abs() < 1e-3, "{v:?}");
}
