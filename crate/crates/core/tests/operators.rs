use psifrac::classical;
use psifrac::expr::parse;
use psifrac::fracops::{
    frac_derivative, frac_derivative_series, frac_integral, frac_integral_series, leibniz_product, FractionalOrder,
    QuadratureSpec,
};
use psifrac::jet::{JetFunction, PointFn};
use psifrac::psi::{Builtin, PsiFunction};
use psifrac::special::rgamma;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn kernels() -> Vec<PsiFunction> {
    vec![
        PsiFunction::builtin(Builtin::Identity, 0.0, 1.0).unwrap(),
        PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 1.0, 2.0).unwrap(),
        PsiFunction::builtin(Builtin::Exponential, 0.0, 1.0).unwrap(),
    ]
}

#[test]
fn derivative_of_constant() {
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap();
    let order = FractionalOrder::new(0.5).unwrap();
    let v = frac_derivative(&JetFunction::constant(1.0), &psi, order, 1.0, q(), None).unwrap();
    assert!((v - 0.5641895835477563).abs() < 1e-9, "{v}");
}

#[test]
fn integer_orders() {
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 2.0).unwrap();
    let one = JetFunction::constant(1.0);
    assert!((frac_integral(&one, &psi, 1.0, 2.0, q()).unwrap() - 2.0).abs() < 1e-13);
    let t2 = JetFunction::parse("t^2").unwrap();
    let d = frac_derivative(&t2, &psi, FractionalOrder::new(1.0).unwrap(), 1.0, q(), None).unwrap();
    assert_eq!(d, 2.0);
}

#[test]
fn integral_semigroup() {
    let f = JetFunction::parse("exp(t) + t^2").unwrap();
    for psi in kernels() {
        for (a1, a2) in [(0.4, 0.7), (0.7, 0.4), (0.4, 0.4), (0.7, 0.7)] {
            let inner = PointFn(|t: f64, _p: f64| frac_integral(&f, &psi, a2, t, q()));
            for t in [psi.a() + 0.3, psi.a() + 0.9] {
                let nested = frac_integral(&inner, &psi, a1, t, q()).unwrap();
                let direct = frac_integral(&f, &psi, a1 + a2, t, q()).unwrap();
                assert!((nested - direct).abs() <= 1e-6 * direct.abs(), "{}: {nested} vs {direct}", psi.expr());
            }
        }
    }
}

#[test]
fn derivative_inverts_integral() {
    let f = JetFunction::parse("1 + t*exp(t)").unwrap();
    for psi in kernels() {
        for alpha in [0.3, 0.5, 1.5] {
            let order = FractionalOrder::new(alpha).unwrap();
            let inner = PointFn(|t: f64, _p: f64| frac_integral(&f, &psi, alpha, t, q()));
            for t in [psi.a() + 0.4, psi.a() + 0.8] {
                let v = frac_derivative(&inner, &psi, order, t, q(), None).unwrap();
                let want = f.eval(0.0, t, &psi).unwrap();
                assert!((v - want).abs() <= 1e-5, "{} alpha={alpha} t={t}: {v} vs {want}", psi.expr());
            }
        }
    }
}

#[test]
fn identity_kernel_matches_classical_routine() {
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap();
    for src in ["1", "t", "t^2", "exp(t)", "3 - t^3"] {
        let e = parse(src).unwrap();
        let f = JetFunction::new(e.clone());
        for alpha in [0.3, 0.5, 1.5] {
            for t in [0.25, 0.7, 1.2] {
                let c_int = classical::rl(&e, 0.0, -alpha, t, 48).unwrap();
                let i = frac_integral(&f, &psi, alpha, t, q()).unwrap();
                assert!((i - c_int).abs() <= 1e-9 * (1.0 + c_int.abs()), "I {src} {alpha} {t}: {i} vs {c_int}");
                let c_der = classical::rl(&e, 0.0, alpha, t, 48).unwrap();
                let s = frac_derivative_series(&f, &psi, FractionalOrder::new(alpha).unwrap(), t, 30).unwrap().value;
                assert!((s - c_der).abs() <= 1e-9 * (1.0 + c_der.abs()), "D {src} {alpha} {t}: {s} vs {c_der}");
            }
        }
    }
}

#[test]
fn series_tail_is_reported() {
    let psi = PsiFunction::builtin(Builtin::Exponential, 0.0, 1.0).unwrap();
    // t = ln(1 + psi) has an infinite expansion
    let f = JetFunction::parse("t").unwrap();
    let short = frac_integral_series(&f, &psi, 0.5, 0.9, 3).unwrap();
    let long = frac_integral_series(&f, &psi, 0.5, 0.9, 30).unwrap();
    assert!(short.tail > long.tail);
    assert!((short.value - long.value).abs() > 1e-6);
}

#[test]
fn leibniz_examples() {
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5).unwrap();
    let order = FractionalOrder::new(0.5).unwrap();
    let direct = |f: &JetFunction, g: &JetFunction, t: f64| {
        let fg = JetFunction::new(f.expr().clone() * g.expr().clone());
        frac_derivative(&fg, &psi, order, t, q(), None).unwrap()
    };

    let (one, t_fn) = (JetFunction::constant(1.0), JetFunction::parse("t").unwrap());
    for t in [0.3, 1.0] {
        for n in 1..=5 {
            let s = leibniz_product(&one, &t_fn, &psi, order, t, n, q()).unwrap().value;
            assert!((s - direct(&one, &t_fn, t)).abs() <= 1e-12);
        }
    }

    let mut prev = f64::INFINITY;
    for n in [1, 2, 3, 5, 8] {
        let err = (leibniz_product(&t_fn, &t_fn, &psi, order, 0.7, n, q()).unwrap().value - direct(&t_fn, &t_fn, 0.7)).abs();
        assert!(err <= prev + 1e-12, "N={n}: {err} after {prev}");
        prev = err;
    }

    let e = JetFunction::parse("exp(t)").unwrap();
    let err = (leibniz_product(&e, &t_fn, &psi, order, 1.0, 25, q()).unwrap().value - direct(&e, &t_fn, 1.0)).abs();
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn leibniz_error_need_not_decrease_monotonically() {
    // The first two partial sums straddle the limit: the m = 1 term overshoots.
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.0).unwrap();
    let order = FractionalOrder::new(1.5).unwrap();
    let f = JetFunction::parse("psi^3 - 2*psi").unwrap();
    let g = JetFunction::parse("1 + psi^2").unwrap();
    // exact: f g = P^5 − P^3 − 2P
    let pw = |b: f64| psifrac::special::gamma(b + 1.0).unwrap() * rgamma(b - 0.5) * 0.7f64.powf(b - 1.5);
    let direct = pw(5.0) - pw(3.0) - 2.0 * pw(1.0);
    let err = |n| (leibniz_product(&f, &g, &psi, order, 0.7, n, q()).unwrap().value - direct).abs();
    assert!(err(2) > err(1));
    assert!(err(10) < 1e-6);
}

#[test]
fn power_rule_fractional_exponent() {
    let psi = PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 1.0, 2.0).unwrap();
    let f = JetFunction::parse("psi^2.5").unwrap();
    let order = FractionalOrder::new(0.3).unwrap();
    let t = 1.6;
    let p = psi.kernel(t).unwrap();
    let exact = psifrac::special::gamma(3.5).unwrap() * rgamma(3.2) * p.powf(2.2);
    let v = frac_derivative(&f, &psi, order, t, q(), None).unwrap();
    assert!((v - exact).abs() <= 1e-6 * exact);
}
