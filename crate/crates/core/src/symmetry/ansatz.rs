//! Linear ansatz over the reduced form:
//! `ξ = k0 + k1 x + k2 x²`, `σ = c0 + c1 P + c2 P²`, `θ = θ0 + θ1 x`,
//! `ρ = r0 + r1 x` (plus a heat eigenfunction for constant diffusivity).
//! Every system is linear in these constants once the `γ` switch is fixed,
//! so residual columns of unit vectors span the map and its null space is
//! the admitted algebra.

use nalgebra::DMatrix;

use super::detsys::{diffusion_eval, gfbe_eval};
use super::table::heat_eigen_expr;
use super::{EquationKind, GeneratorCandidate, SystemSetup};
use super::table::Case;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::prolong::ReducedInfinitesimals;

const BASE_UNKNOWNS: [&str; 10] = ["xi0", "xi1", "xi2", "c0", "c1", "c2", "theta0", "theta1", "rho0", "rho1"];
const C2: usize = 5;
const CLEAN: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct AnsatzSolution {
    pub case: Case,
    pub unknowns: Vec<&'static str>,
    /// Coefficient vectors in reduced row echelon form.
    pub basis: Vec<Vec<f64>>,
    pub generators: Vec<GeneratorCandidate>,
}

fn unknowns(case: Case) -> Vec<&'static str> {
    let mut u = BASE_UNKNOWNS.to_vec();
    if case == Case::DiffusionConstant {
        u.push("rho_heat");
    }
    u
}

fn assemble(q: &[f64], alpha: f64) -> ReducedInfinitesimals {
    let x = Expr::x;
    let c = |v: f64| Expr::Const(v);
    let xi = c(q[0]) + c(q[1]) * x() + c(q[2]) * x().powf(2.0);
    let theta = c(q[6]) + c(q[7]) * x();
    let mut rho = c(q[8]) + c(q[9]) * x();
    if q.len() > 10 {
        rho = rho + c(q[10]) * heat_eigen_expr(alpha);
    }
    ReducedInfinitesimals::new(xi, [q[3], q[4], q[5]], theta, rho).expect("ansatz shape")
}

fn residual_vector(case: Case, r: &ReducedInfinitesimals, gamma: bool, setup: &SystemSetup) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut sink = |_: usize, _: super::Node, v: f64| {
        out.push(v);
        Ok(())
    };
    match case.equation() {
        EquationKind::Gfbe { g } => gfbe_eval(r, gamma, &g, setup, &mut sink)?,
        EquationKind::Diffusion { k } => diffusion_eval(r, gamma, &k, setup, &mut sink)?,
        EquationKind::Custom { .. } => return Err(Error::NotImplemented("ansatz for custom equations")),
    }
    Ok(out)
}

/// Orthonormal null-space basis of the columns `cols`.
fn null_space(cols: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    if m == 0 {
        return Ok((0..n).map(|j| (0..n).map(|i| f64::from(u8::from(i == j))).collect()).collect());
    }
    // pad rows so the thin SVD returns a full right basis
    let rows = m.max(n);
    let a = DMatrix::from_fn(rows, n, |i, j| if i < m { cols[j][i] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Invalid("SVD failed".into()))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thresh = 1e-8 * smax.max(1e-300);
    Ok((0..n).filter(|&k| svd.singular_values[k] <= thresh).map(|k| vt.row(k).iter().cloned().collect()).collect())
}

/// Reduced row echelon form with unit pivots; negligible entries cleared.
fn rref(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut lead = 0;
    for col in 0..n {
        if lead >= rows.len() {
            break;
        }
        let (piv, val) = (lead..rows.len()).map(|r| (r, rows[r][col].abs())).fold((lead, 0.0), |b, c| if c.1 > b.1 { c } else { b });
        if val <= CLEAN {
            continue;
        }
        rows.swap(lead, piv);
        let p = rows[lead][col];
        rows[lead].iter_mut().for_each(|v| *v /= p);
        for r in 0..rows.len() {
            if r != lead {
                let f = rows[r][col];
                if f != 0.0 {
                    let pivot = rows[lead].clone();
                    rows[r].iter_mut().zip(&pivot).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        lead += 1;
    }
    rows.truncate(lead);
    for row in &mut rows {
        row.iter_mut().for_each(|v| {
            if v.abs() < CLEAN {
                *v = 0.0;
            }
        });
    }
    rows
}

/// Solve for the admitted generators of a case on the setup's grid.
pub fn solve_ansatz(case: Case, setup: &SystemSetup) -> Result<AnsatzSolution> {
    case.validate()?;
    setup.grid.check(setup.psi())?;
    let alpha = setup.alpha();
    let names = unknowns(case);
    let n = names.len();
    let unit = |j: usize| -> Vec<f64> { (0..n).map(|i| f64::from(u8::from(i == j))).collect() };

    // γ off, c2 = 0
    let free: Vec<usize> = (0..n).filter(|&j| j != C2).collect();
    let cols = free.iter().map(|&j| residual_vector(case, &assemble(&unit(j), alpha), false, setup)).collect::<Result<Vec<_>>>()?;
    let mut basis: Vec<Vec<f64>> = null_space(&cols)?
        .into_iter()
        .map(|v| {
            let mut full = vec![0.0; n];
            free.iter().zip(&v).for_each(|(&j, x)| full[j] = *x);
            full
        })
        .collect();
    basis = rref(basis);

    // γ on: admitted only with c2 ≠ 0
    let cols = (0..n).map(|j| residual_vector(case, &assemble(&unit(j), alpha), true, setup)).collect::<Result<Vec<_>>>()?;
    let null_b = null_space(&cols)?;
    if null_b.iter().any(|v| v[C2].abs() > CLEAN) {
        let mut order: Vec<usize> = vec![C2];
        order.extend((0..n).filter(|&j| j != C2));
        let permuted = null_b.iter().map(|v| order.iter().map(|&j| v[j]).collect()).collect();
        if let Some(first) = rref(permuted).into_iter().next() {
            if first[0] != 0.0 {
                let mut full = vec![0.0; n];
                order.iter().zip(&first).for_each(|(&j, x)| full[j] = *x);
                basis.push(full);
            }
        }
    }

    let generators = basis.iter().enumerate().map(|(i, q)| GeneratorCandidate::reduced(format!("X{}", i + 1), assemble(q, alpha))).collect();
    Ok(AnsatzSolution { case, unknowns: names, basis, generators })
}

fn fingerprint(c: &GeneratorCandidate, alpha: f64) -> Result<Vec<f64>> {
    let r = c.as_reduced().ok_or_else(|| Error::Invalid("span comparison needs reduced candidates".into()))?;
    let (xs, ps, us) = ([0.3, 0.55, 0.8, 1.1], [0.2, 0.5, 0.9], [0.6, 1.3]);
    let at = |e: &Expr, x: f64, p: f64, u: f64| {
        e.eval_vars(&|v| match v {
            Var::X => Some(x),
            Var::P => Some(p),
            Var::U => Some(u),
            _ => None,
        })
    };
    let (sigma, eta) = (r.sigma(), r.eta(alpha));
    let mut out = Vec::new();
    for &x in &xs {
        out.push(at(&r.xi, x, 0.0, 0.0)?);
    }
    for &p in &ps {
        out.push(at(&sigma, 0.0, p, 0.0)?);
    }
    for &x in &xs {
        for &p in &ps {
            for &u in &us {
                out.push(at(&eta, x, p, u)?);
            }
        }
    }
    Ok(out)
}

fn rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let (m, n) = (rows.len(), rows[0].len());
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let s = a.singular_values();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > 1e-8 * smax).count()
}

/// Whether two generator lists span the same space, compared through their
/// component values on fixed sample points.
pub fn same_span(a: &[GeneratorCandidate], b: &[GeneratorCandidate], alpha: f64) -> Result<bool> {
    let fa = a.iter().map(|c| fingerprint(c, alpha)).collect::<Result<Vec<_>>>()?;
    let fb = b.iter().map(|c| fingerprint(c, alpha)).collect::<Result<Vec<_>>>()?;
    let mut both = fa.clone();
    both.extend(fb.iter().cloned());
    let (ra, rb, rab) = (rank(&fa), rank(&fb), rank(&both));
    Ok(ra == rab && rb == rab)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_normalizes_pivots() {
        let r = rref(vec![vec![0.0, 2.0, 4.0], vec![1.0, 1.0, 1.0]]);
        assert_eq!(r, vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, 2.0]]);
    }

    #[test]
    fn null_space_of_rank_one_map() {
        let ns = null_space(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(ns.len(), 2);
        let basis = rref(ns);
        assert!((basis[0][1] + 0.5).abs() < 1e-12);
        assert!((basis[1][2] - 1.0).abs() < 1e-12);
    }
}
