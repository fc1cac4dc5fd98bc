//! Determining systems of time-fractional evolution equations as residual
//! functionals, sampled on grids, plus a linear ansatz solver and the
//! published generator tables.

mod ansatz;
mod detsys;
mod powersum;
mod table;

pub use ansatz::{same_span, solve_ansatz, AnsatzSolution};
pub use detsys::{detsys_diffusion, detsys_gazizov_rl, detsys_gfbe, detsys_zhang_rl, probe_jet};
pub use powersum::{frac_derivative_expr, power_sum, PowerSum};
pub use table::{builtin_table, lookup, Case, TableEntry};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::prolong::{Infinitesimals, ProlongSpec, ReducedInfinitesimals};
use crate::psi::PsiFunction;

/// Right-hand side family of `D^{α;ψ} u = H + S`.
#[derive(Debug, Clone, PartialEq)]
pub enum EquationKind {
    /// `H = g(u) u_x + u_xx`.
    Gfbe { g: Expr },
    /// `H = (K(u) u_x)_x`.
    Diffusion { k: Expr },
    /// `H` in jet variables, `S(x, t)`.
    Custom { h: Expr, s: Expr },
}

/// How `H` depends on `u_i = ∂_x^i u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermClass {
    pub i: usize,
    /// `H_{u_i}` free of jet variables.
    pub linear: bool,
}

#[derive(Debug, Clone)]
pub struct EvolutionEquation {
    pub kind: EquationKind,
    h: Expr,
    s: Expr,
    terms: Vec<TermClass>,
}

impl EvolutionEquation {
    pub fn new(kind: EquationKind) -> Result<Self> {
        let (h, s) = match &kind {
            EquationKind::Gfbe { g } => {
                if !g.depends_on(Var::U) {
                    return Err(Error::Invalid("g(u) must not be constant".into()));
                }
                check_only_u("g", g)?;
                (g.clone() * Expr::var(Var::Jet(1, 0)) + Expr::var(Var::Jet(2, 0)), Expr::zero())
            }
            EquationKind::Diffusion { k } => {
                check_only_u("K", k)?;
                let flux = k.clone() * Expr::var(Var::Jet(1, 0));
                (flux.total_diff_x(), Expr::zero())
            }
            EquationKind::Custom { h, s } => {
                if h.vars().iter().any(|v| matches!(v, Var::Jet(_, j) if *j > 0)) {
                    return Err(Error::Invalid("H may not contain time derivatives".into()));
                }
                if s.has_jet_vars() {
                    return Err(Error::Invalid("S must depend on x and t only".into()));
                }
                (h.clone(), s.clone())
            }
        };
        let mut terms: Vec<TermClass> = h
            .vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Jet(i, 0) => Some(TermClass { i: i as usize, linear: !h.diff(v).has_jet_vars() }),
                _ => None,
            })
            .collect();
        terms.sort_by_key(|c| c.i);
        Ok(Self { kind, h, s, terms })
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn s(&self) -> &Expr {
        &self.s
    }

    /// The effective terms `W`; members with `linear` set form `V`.
    pub fn terms(&self) -> &[TermClass] {
        &self.terms
    }
}

fn check_only_u(name: &str, e: &Expr) -> Result<()> {
    if e.vars().iter().any(|v| *v != Var::U) {
        return Err(Error::Invalid(format!("{name} must be a function of u alone")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateForm {
    Reduced(ReducedInfinitesimals),
    General(Infinitesimals),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCandidate {
    pub label: String,
    pub form: CandidateForm,
}

impl GeneratorCandidate {
    pub fn reduced(label: impl Into<String>, r: ReducedInfinitesimals) -> Self {
        Self { label: label.into(), form: CandidateForm::Reduced(r) }
    }

    pub fn general(label: impl Into<String>, inf: Infinitesimals) -> Self {
        Self { label: label.into(), form: CandidateForm::General(inf) }
    }

    pub fn as_reduced(&self) -> Option<&ReducedInfinitesimals> {
        match &self.form {
            CandidateForm::Reduced(r) => Some(r),
            CandidateForm::General(_) => None,
        }
    }

    pub fn to_general(&self, alpha: f64) -> Infinitesimals {
        match &self.form {
            CandidateForm::Reduced(r) => r.to_infinitesimals(alpha),
            CandidateForm::General(g) => g.clone(),
        }
    }

    fn require_reduced(&self) -> Result<&ReducedInfinitesimals> {
        self.as_reduced().ok_or_else(|| Error::Invalid(format!("candidate `{}` must be given in reduced form", self.label)))
    }
}

/// Sample nodes `(x, t, u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl Grid {
    pub fn new(x: Vec<f64>, t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if x.is_empty() || t.is_empty() || u.is_empty() {
            return Err(Error::Invalid("grid has no nodes".into()));
        }
        Ok(Self { x, t, u })
    }

    /// `n³` nodes over `[0.2, 1] × [a + 0.2, a + 1] × [0.5, 2]`.
    pub fn uniform(a: f64, n: usize) -> Result<Self> {
        Self::new(linspace(0.2, 1.0, n), linspace(a + 0.2, a + 1.0, n), linspace(0.5, 2.0, n))
    }

    pub fn standard(a: f64) -> Self {
        Self::uniform(a, 5).expect("fixed grid")
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.t.len() * self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self, psi: &PsiFunction) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Invalid("grid has no nodes".into()));
        }
        for &t in &self.t {
            if !(t > psi.a() && t <= psi.b()) {
                return Err(Error::OutOfRange { value: t, lo: psi.a(), hi: psi.b() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub x: f64,
    pub t: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub name: String,
    pub max_abs: f64,
    /// Node of the largest residual.
    pub node: Option<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub system: String,
    pub candidate: String,
    pub tolerance: f64,
    pub grid: Grid,
    pub equations: Vec<EquationResidual>,
    pub pass: bool,
}

impl ResidualReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.equations.iter().find(|e| e.name == name).map(|e| e.max_abs)
    }

    /// Equations above tolerance.
    pub fn failing(&self) -> Vec<&str> {
        self.equations.iter().filter(|e| !(e.max_abs <= self.tolerance)).map(|e| e.name.as_str()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.equations.iter().map(|e| e.max_abs).fold(0.0, f64::max)
    }
}

/// Everything a determining system needs besides the candidate.
#[derive(Debug, Clone)]
pub struct SystemSetup {
    pub spec: ProlongSpec,
    pub grid: Grid,
    pub tol: f64,
    /// Seed of the polynomial `u` probes.
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_240_817;

impl SystemSetup {
    pub fn new(spec: ProlongSpec, grid: Grid, tol: f64) -> Self {
        Self { spec, grid, tol, seed: DEFAULT_SEED }
    }

    /// Standard grid and tolerance `1e-8`.
    pub fn standard(spec: ProlongSpec) -> Self {
        let a = spec.psi.a();
        Self::new(spec, Grid::standard(a), 1e-8)
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    pub fn psi(&self) -> &PsiFunction {
        &self.spec.psi
    }
}

/// Running max-abs per equation in fixed node order.
struct Accumulator {
    names: Vec<String>,
    max: Vec<f64>,
    node: Vec<Option<Node>>,
}

impl Accumulator {
    fn new(names: Vec<String>) -> Self {
        let n = names.len();
        Self { names, max: vec![0.0; n], node: vec![None; n] }
    }

    fn push(&mut self, eq: usize, value: f64, node: Node) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite("determining-equation residual"));
        }
        let a = value.abs();
        if self.node[eq].is_none() || a > self.max[eq] {
            self.max[eq] = a;
            self.node[eq] = Some(node);
        }
        Ok(())
    }

    fn finish(self, system: &str, candidate: &str, setup: &SystemSetup) -> ResidualReport {
        let equations: Vec<EquationResidual> = self
            .names
            .into_iter()
            .zip(self.max)
            .zip(self.node)
            .map(|((name, max_abs), node)| EquationResidual { name, max_abs, node })
            .collect();
        let pass = equations.iter().all(|e| e.max_abs <= setup.tol);
        ResidualReport {
            system: system.into(),
            candidate: candidate.into(),
            tolerance: setup.tol,
            grid: setup.grid.clone(),
            equations,
            pass,
        }
    }
}

/// Point evaluation with jet variables taken from a lookup.
struct NodeEnv<'a> {
    x: f64,
    t: f64,
    p: f64,
    psi: &'a PsiFunction,
    jets: &'a dyn Fn(u8, u8) -> Option<f64>,
}

impl Env<f64> for NodeEnv<'_> {
    fn constant(&self, c: f64) -> f64 {
        c
    }

    fn var(&self, v: Var) -> Result<f64> {
        match v {
            Var::X => Ok(self.x),
            Var::T => Ok(self.t),
            Var::P => Ok(self.p),
            Var::Jet(i, j) => (self.jets)(i, j).ok_or_else(|| Error::Unbound(v.name())),
        }
    }

    fn psi_deriv(&self, k: u32) -> Result<f64> {
        self.psi.deriv_k(self.t, k as usize)
    }
}

fn eval_node(e: &Expr, node: Node, psi: &PsiFunction) -> Result<f64> {
    let jets = |i: u8, j: u8| if (i, j) == (0, 0) { Some(node.u) } else { None };
    e.eval_with(&NodeEnv { x: node.x, t: node.t, p: psi.kernel(node.t)?, psi, jets: &jets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn term_classes_of_burgers_type() {
        let eq = EvolutionEquation::new(EquationKind::Gfbe { g: parse("u").unwrap() }).unwrap();
        assert_eq!(eq.terms(), &[TermClass { i: 0, linear: false }, TermClass { i: 1, linear: false }, TermClass { i: 2, linear: true }]);
        assert!(EvolutionEquation::new(EquationKind::Gfbe { g: parse("3").unwrap() }).is_err());
        let diff = EvolutionEquation::new(EquationKind::Diffusion { k: parse("1").unwrap() }).unwrap();
        assert_eq!(diff.terms(), &[TermClass { i: 2, linear: true }]);
    }

    #[test]
    fn grid_layout() {
        let g = Grid::standard(0.5);
        assert_eq!(g.len(), 125);
        assert_eq!(g.t[0], 0.7);
        assert_eq!(g.t[4], 1.5);
        assert!(Grid::new(vec![], vec![1.0], vec![1.0]).is_err());
    }
}
