//! Truncated Taylor series arithmetic.
//!
//! A [`Series`] stores the normalized coefficients `c_k = f^{(k)}(x0) / k!`
//! of a function around a base point, truncated at a fixed length. All jet
//! derivatives in the crate are computed exactly (up to rounding) through
//! these series instead of finite differences.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::special::factorial;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    coef: Vec<f64>,
}

impl Series {
    /// Constant series of the given length (number of coefficients).
    pub fn constant(value: f64, len: usize) -> Self {
        let mut coef = vec![0.0; len.max(1)];
        coef[0] = value;
        Self { coef }
    }

    /// The identity series `x0 + h`.
    pub fn variable(x0: f64, len: usize) -> Self {
        let mut s = Self::constant(x0, len);
        if s.coef.len() > 1 {
            s.coef[1] = 1.0;
        }
        s
    }

    pub fn from_coefficients(coef: Vec<f64>) -> Self {
        assert!(!coef.is_empty(), "series needs at least one coefficient");
        Self { coef }
    }

    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    /// k-th derivative at the base point, `k! c_k`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coef.get(k).map_or(0.0, |c| c * factorial(k))
    }

    /// Series of the derivative; one coefficient shorter.
    pub fn differentiate(&self) -> Self {
        if self.len() == 1 {
            return Self::constant(0.0, 1);
        }
        Self { coef: (1..self.len()).map(|k| k as f64 * self.coef[k]).collect() }
    }

    pub fn truncate(&self, len: usize) -> Self {
        Self { coef: self.coef[..len.clamp(1, self.len())].to_vec() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coef: self.coef.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coef[0] += s;
        out
    }

    fn zip_len(&self, other: &Self) -> usize {
        self.len().min(other.len())
    }

    pub fn recip(&self) -> Result<Self> {
        let n = self.len();
        let a0 = self.coef[0];
        if a0 == 0.0 {
            return Err(Error::Domain("reciprocal of a series with zero constant term".into()));
        }
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.coef[j] * b[k - j];
            }
            b[k] = -s / a0;
        }
        Ok(Self { coef: b })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn exp(&self) -> Self {
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = self.coef[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.coef[j] * b[k - j];
            }
            b[k] = s / k as f64;
        }
        Self { coef: b }
    }

    pub fn ln(&self) -> Result<Self> {
        let n = self.len();
        let a0 = self.coef[0];
        if a0 <= 0.0 {
            return Err(Error::Domain(format!("logarithm of non-positive value {a0}")));
        }
        let mut b = vec![0.0; n];
        b[0] = a0.ln();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * b[j] * self.coef[k - j];
            }
            b[k] = (self.coef[k] - s / k as f64) / a0;
        }
        Ok(Self { coef: b })
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, e: i32) -> Result<Self> {
        if e < 0 {
            return self.powi(-e)?.recip();
        }
        let mut base = self.clone();
        let mut acc = Self::constant(1.0, self.len());
        let mut e = e as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Real power `self^p`. Integer exponents go through [`Series::powi`];
    /// otherwise the constant term must be non-zero (positive for the
    /// principal real branch).
    pub fn powf(&self, p: f64) -> Result<Self> {
        if p == p.trunc() && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let a0 = self.coef[0];
        if a0 <= 0.0 {
            return Err(Error::Domain(format!("non-integer power {p} of non-positive value {a0}")));
        }
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = a0.powf(p);
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += (j as f64 * p - (k - j) as f64) * self.coef[j] * b[k - j];
            }
            b[k] = s / (k as f64 * a0);
        }
        Ok(Self { coef: b })
    }

    /// `self ∘ inner` for an inner series with zero constant term.
    pub fn compose(&self, inner: &Self) -> Self {
        debug_assert!(inner.coef[0] == 0.0);
        let n = self.zip_len(inner);
        let inner = Self { coef: inner.coef[..n].to_vec() };
        let mut acc = Self::constant(self.coef[n - 1], n);
        for k in (0..n - 1).rev() {
            acc = (&acc * &inner).add_scalar(self.coef[k]);
        }
        acc
    }

    /// Compositional inverse of `self - self(0)`: returns `q` with
    /// `self(q(s)) - self(0) = s`. Requires a non-zero linear coefficient.
    pub fn revert(&self) -> Result<Self> {
        let n = self.len();
        if n < 2 {
            return Ok(Self::constant(0.0, n));
        }
        let p1 = self.coef[1];
        if p1 == 0.0 {
            return Err(Error::Domain("series reversion needs a non-zero linear term".into()));
        }
        let mut shifted = self.clone();
        shifted.coef[0] = 0.0;
        shifted.coef[1] = 0.0;
        // fixed point q = (s - higher(q)) / p1, one more correct order per sweep
        let mut q = Self::constant(0.0, n);
        q.coef[1] = 1.0 / p1;
        for _ in 2..n {
            let higher = shifted.compose(&q);
            let mut next = Self::constant(0.0, n);
            next.coef[1] = 1.0 / p1;
            for k in 2..n {
                next.coef[k] = -higher.coef[k] / p1;
            }
            q = next;
        }
        Ok(q)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.zip_len(rhs);
        Series { coef: (0..n).map(|k| self.coef[k] + rhs.coef[k]).collect() }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.zip_len(rhs);
        Series { coef: (0..n).map(|k| self.coef[k] - rhs.coef[k]).collect() }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.zip_len(rhs);
        let mut c = vec![0.0; n];
        for (i, a) in self.coef[..n].iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += a * rhs.coef[j];
            }
        }
        Series { coef: c }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exp_of_variable() {
        let s = Series::variable(0.0, 8).exp();
        for k in 0..8 {
            assert!((s.coefficients()[k] - 1.0 / factorial(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn reversion_of_exponential_is_log() {
        // exp(h) - 1 reverted is ln(1 + s)
        let q = Series::variable(0.0, 10).exp().revert().unwrap();
        for k in 1..10 {
            let want = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            assert!((q.coefficients()[k] - want).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn powf_matches_binomial_series() {
        let s = Series::variable(1.0, 6).powf(0.5).unwrap();
        for k in 0..6 {
            let want = crate::special::gen_binom(0.5, k);
            assert!((s.coefficients()[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_inputs_error() {
        assert!(Series::constant(0.0, 4).recip().is_err());
        assert!(Series::constant(-1.0, 4).ln().is_err());
        assert!(Series::constant(-1.0, 4).powf(0.5).is_err());
        assert!(Series::constant(-2.0, 4).powf(3.0).is_ok());
    }

    proptest! {
        #[test]
        fn ln_inverts_exp(c in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let s = Series::from_coefficients(c);
            let back = s.exp().ln().unwrap();
            for (a, b) in s.coefficients().iter().zip(back.coefficients()) {
                prop_assert!((a - b).abs() < 1e-11);
            }
        }

        #[test]
        fn revert_composes_to_identity(c in proptest::collection::vec(-0.5f64..0.5, 7), lead in 0.5f64..2.0) {
            let mut coef = c;
            coef[0] = 0.0;
            coef[1] = lead;
            let p = Series::from_coefficients(coef);
            let q = p.revert().unwrap();
            let id = p.compose(&q);
            prop_assert!((id.coefficients()[1] - 1.0).abs() < 1e-10);
            for k in 2..7 {
                prop_assert!(id.coefficients()[k].abs() < 1e-9, "k={} {}", k, id.coefficients()[k]);
            }
        }
    }
}
