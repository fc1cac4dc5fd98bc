//! Gauss–Jacobi quadrature by the Golub–Welsch eigenvalue method.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Nodes and weights for `∫_{-1}^{1} (1-x)^a (1+x)^b f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobi {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(*x)?;
        }
        Ok(acc)
    }
}

type Key = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Arc<GaussJacobi>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<GaussJacobi>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Rule with `n` nodes for exponents `a, b > -1`. Rules are cached.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Arc<GaussJacobi>> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::Quadrature(format!("Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = cache().lock().expect("quadrature cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(golub_welsch(n, a, b)?);
    cache().lock().expect("quadrature cache poisoned").insert(key, rule.clone());
    Ok(rule)
}

fn golub_welsch(n: usize, a: f64, b: f64) -> Result<GaussJacobi> {
    let ab = a + b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    diag[0] = (b - a) / (ab + 2.0);
    for (k, d) in diag.iter_mut().enumerate().skip(1) {
        let k = k as f64;
        *d = (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let beta = if i == 0 {
            4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0).powi(2) * (ab + 3.0))
        } else {
            let s = 2.0 * k + ab;
            4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        *o = beta.sqrt();
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag[i];
        if i + 1 < n {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0)? * gamma(b + 1.0)? / gamma(ab + 2.0)?;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], mu0 * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::Quadrature("non-finite node or weight".into()));
    }
    Ok(GaussJacobi { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}
