//! Gamma, reciprocal gamma and the generalized binomial coefficient.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Lanczos sum for `x >= 0.5`.
fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // split the power so that large arguments do not overflow early
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * acc
}

/// The gamma function. Errors at the poles `0, -1, -2, ...`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::NonFinite("gamma"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x == x.floor() && x <= 31.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if x < 0.5 {
        // reflection
        Ok(PI / ((PI * x).sin() * lanczos(1.0 - x)))
    } else {
        Ok(lanczos(x))
    }
}

/// `1/Γ(x)`, equal to exactly zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        (PI * x).sin() * lanczos(1.0 - x) / PI
    } else if x > 171.0 {
        0.0
    } else {
        1.0 / gamma(x).expect("no pole for x >= 0.5")
    }
}

/// Generalized binomial coefficient `binom(alpha, m)` computed by the
/// falling-factorial product `∏_{j<m} (alpha - j) / m!`.
pub fn gen_binom(alpha: f64, m: usize) -> f64 {
    let mut value = 1.0;
    for j in 0..m {
        value *= (alpha - j as f64) / (j + 1) as f64;
    }
    value
}

/// Ordinary binomial coefficient for small non-negative integers.
pub fn binom_usize(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    gen_binom(n as f64, k)
}

/// `m!` as a float.
pub fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // high-precision reference values (30 significant digits, rounded)
    const REFERENCE: [(f64, f64); 10] = [
        (0.1, 9.513_507_698_668_731_285_8),
        (0.5, 1.772_453_850_905_516_027_3),
        (1.5, 0.886_226_925_452_758_013_65),
        (2.5, 1.329_340_388_179_137_020_5),
        (3.7, 4.170_651_783_796_604_030_1),
        (7.25, 1155.381_013_919_989_687_2),
        (12.5, 136_843_365.465_565_857_26),
        (29.9, 6.304_174_488_373_721_221e30),
        (-0.5, -3.544_907_701_811_032_054_6),
        (-2.5, -0.945_308_720_482_941_881_23),
    ];

    #[test]
    fn gamma_matches_reference() {
        for (x, want) in REFERENCE {
            let got = gamma(x).unwrap();
            assert!(((got - want) / want).abs() <= 1e-13, "gamma({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn gamma_small_integers_exact() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert_eq!(gamma(2.0).unwrap(), 1.0);
    }

    #[test]
    fn gamma_poles() {
        assert_eq!(gamma(0.0), Err(Error::Pole(0.0)));
        assert_eq!(gamma(-3.0), Err(Error::Pole(-3.0)));
    }

    #[test]
    fn rgamma_poles_and_values() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert_eq!(rgamma(2.0), 1.0);
        assert!((rgamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn binomial_cases() {
        assert_eq!(gen_binom(0.37, 0), 1.0);
        assert_eq!(gen_binom(3.0, 2), 3.0);
        assert_eq!(gen_binom(0.5, 2), -0.125);
        assert_eq!(gen_binom(3.0, 5), 0.0);
        assert_eq!(gen_binom(-0.5, 1), -0.5);
    }

    proptest! {
        #[test]
        fn pascal_identity(alpha in -5.0f64..5.0, m in 0usize..=20) {
            let lhs = gen_binom(alpha, m + 1) + gen_binom(alpha, m);
            let rhs = gen_binom(alpha + 1.0, m + 1);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn binomial_gamma_identity(alpha in 0.05f64..8.0, m in 0usize..=10) {
            prop_assume!((alpha - m as f64 + 1.0).fract().abs() > 1e-6);
            prop_assume!(alpha - m as f64 + 1.0 > 0.0 || (alpha - m as f64 + 1.0).fract() != 0.0);
            let lhs = gen_binom(alpha, m) * gamma(alpha - m as f64 + 1.0).unwrap() * gamma(m as f64 + 1.0).unwrap();
            let rhs = gamma(alpha + 1.0).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
        }
    }
}
