use std::time::Instant;

use psifrac::acceptance::{run_all, CriterionResult};
use psifrac::expr::{parse, Var};
use psifrac::fracops::{
    frac_derivative, frac_derivative_series, frac_integral, frac_integral_series, leibniz_product, FractionalOrder,
    QuadratureSpec,
};
use psifrac::jet::{JetFunction, SolutionJet};
use psifrac::prolong::{compact_form, eta_alpha_psi, Infinitesimals, ProlongSpec, ReducedInfinitesimals};
use psifrac::psi::PsiFunction;
use psifrac::symmetry::{
    detsys_diffusion, detsys_gazizov_rl, detsys_gfbe, detsys_zhang_rl, same_span, solve_ansatz, Case, EquationKind,
    EvolutionEquation, GeneratorCandidate, ResidualReport, SystemSetup,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{Cell, Tabular};
use crate::CliError;

/// Rendered output plus the exit status it implies.
pub struct Outcome<T> {
    pub report: T,
    pub pass: bool,
}

fn kernel_label(psi: &PsiFunction) -> String {
    format!("{} on [{}, {}]", psi.expr(), psi.a(), psi.b())
}

fn quad(cfg: &RunConfig) -> Result<QuadratureSpec, CliError> {
    QuadratureSpec::new(cfg.nodes).map_err(CliError::from)
}

/// A function of `t` alone.
fn time_function(src: &str) -> Result<JetFunction, CliError> {
    let f = JetFunction::parse(src)?;
    if f.expr().vars().into_iter().any(|v| matches!(v, Var::X | Var::U)) {
        return Err(CliError::Config(format!("`{src}` must depend on t only")));
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Integral,
    Derivative,
}

#[derive(Serialize)]
pub struct EvalRow {
    pub t: f64,
    pub quadrature: f64,
    pub series: f64,
    pub series_tail: f64,
    pub discrepancy: f64,
}

#[derive(Serialize)]
pub struct EvalReport {
    pub op: Op,
    pub f: String,
    pub alpha: f64,
    pub kernel: String,
    pub terms: usize,
    pub rows: Vec<EvalRow>,
}

impl Tabular for EvalReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["t", "quadrature", "series", "series_tail", "discrepancy"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| vec![Cell::Num(r.t), Cell::Num(r.quadrature), Cell::Num(r.series), Cell::Num(r.series_tail), Cell::Num(r.discrepancy)])
            .collect()
    }
    fn preamble(&self) -> Vec<String> {
        let name = match self.op {
            Op::Integral => "I",
            Op::Derivative => "D",
        };
        vec![format!("{name}^({}) of {} with psi = {}, series N = {}", self.alpha, self.f, self.kernel, self.terms)]
    }
}

pub fn eval(cfg: &RunConfig, op: Op, f_src: &str, ts: &[f64]) -> Result<Outcome<EvalReport>, CliError> {
    let f = time_function(f_src)?;
    let quad = quad(cfg)?;
    let order = FractionalOrder::new(cfg.alpha)?;
    let mut rows = Vec::new();
    for &t in ts {
        let (q, s) = match op {
            Op::Integral => (frac_integral(&f, &cfg.psi, cfg.alpha, t, quad)?, frac_integral_series(&f, &cfg.psi, cfg.alpha, t, cfg.terms)?),
            Op::Derivative => (frac_derivative(&f, &cfg.psi, order, t, quad, None)?, frac_derivative_series(&f, &cfg.psi, order, t, cfg.terms)?),
        };
        rows.push(EvalRow { t, quadrature: q, series: s.value, series_tail: s.tail, discrepancy: (q - s.value).abs() });
    }
    let report = EvalReport { op, f: f_src.into(), alpha: cfg.alpha, kernel: kernel_label(&cfg.psi), terms: cfg.terms, rows };
    Ok(Outcome { report, pass: true })
}

#[derive(Serialize)]
pub struct LeibnizRow {
    pub t: f64,
    pub n: usize,
    pub leibniz: f64,
    pub direct: f64,
    pub error: f64,
    pub tail: f64,
}

#[derive(Serialize)]
pub struct LeibnizReport {
    pub f: String,
    pub g: String,
    pub alpha: f64,
    pub kernel: String,
    pub tolerance: f64,
    pub rows: Vec<LeibnizRow>,
    pub pass: bool,
}

impl Tabular for LeibnizReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["t", "n", "leibniz", "direct", "error", "tail"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| vec![Cell::Num(r.t), Cell::Int(r.n as u64), Cell::Num(r.leibniz), Cell::Num(r.direct), Cell::Num(r.error), Cell::Num(r.tail)])
            .collect()
    }
    fn preamble(&self) -> Vec<String> {
        vec![
            format!("D^({}) of ({})({}) with psi = {}", self.alpha, self.f, self.g, self.kernel),
            format!("final-N error within {:e}: {}", self.tolerance, self.pass),
        ]
    }
}

pub const LEIBNIZ_TOL: f64 = 1e-6;

pub fn leibniz(cfg: &RunConfig, f_src: &str, g_src: &str, ts: &[f64], ns: &[usize]) -> Result<Outcome<LeibnizReport>, CliError> {
    let (f, g) = (time_function(f_src)?, time_function(g_src)?);
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::Config("truncation orders must be positive".into()));
    }
    let fg = JetFunction::new(f.expr().clone() * g.expr().clone());
    let quad = quad(cfg)?;
    let order = FractionalOrder::new(cfg.alpha)?;
    let tol = cfg.tol.unwrap_or(LEIBNIZ_TOL);
    let nmax = *ns.iter().max().expect("nonempty");
    let mut rows = Vec::new();
    let mut pass = true;
    for &t in ts {
        let direct = frac_derivative(&fg, &cfg.psi, order, t, quad, None)?;
        for &n in ns {
            let s = leibniz_product(&f, &g, &cfg.psi, order, t, n, quad)?;
            let error = (s.value - direct).abs();
            if n == nmax && !(error <= tol) {
                pass = false;
            }
            rows.push(LeibnizRow { t, n, leibniz: s.value, direct, error, tail: s.tail });
        }
    }
    let report = LeibnizReport { f: f_src.into(), g: g_src.into(), alpha: cfg.alpha, kernel: kernel_label(&cfg.psi), tolerance: tol, rows, pass };
    Ok(Outcome { pass, report })
}

#[derive(Serialize)]
pub struct ProlongRow {
    pub t: f64,
    pub eta: f64,
    pub mu: f64,
    pub omega: f64,
    pub compact: f64,
    pub discrepancy: f64,
    pub tail: f64,
}

#[derive(Serialize)]
pub struct ProlongReport {
    pub xi: String,
    pub tau: String,
    pub eta: String,
    pub u: String,
    pub x: f64,
    pub alpha: f64,
    pub kernel: String,
    pub rows: Vec<ProlongRow>,
}

impl Tabular for ProlongReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["t", "eta", "mu", "omega", "compact", "discrepancy", "tail"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                [r.t, r.eta, r.mu, r.omega, r.compact, r.discrepancy, r.tail].into_iter().map(Cell::Num).collect()
            })
            .collect()
    }
    fn preamble(&self) -> Vec<String> {
        vec![format!(
            "order {} prolongation of xi = {}, tau = {}, eta = {} on u = {} at x = {}, psi = {}",
            self.alpha, self.xi, self.tau, self.eta, self.u, self.x, self.kernel
        )]
    }
}

fn prolong_spec(cfg: &RunConfig) -> Result<ProlongSpec, CliError> {
    let mut spec = ProlongSpec::new(cfg.psi.clone(), cfg.alpha)?;
    spec.quad = quad(cfg)?;
    spec.terms = cfg.terms;
    Ok(spec)
}

pub struct GeneralArgs<'a> {
    pub xi: &'a str,
    pub tau: &'a str,
    pub eta: &'a str,
}

pub fn prolong(cfg: &RunConfig, g: GeneralArgs<'_>, u_src: &str, x: f64, ts: &[f64]) -> Result<Outcome<ProlongReport>, CliError> {
    let inf = Infinitesimals::parse(g.xi, g.tau, g.eta)?;
    let jet = SolutionJet::parse(u_src)?;
    let spec = prolong_spec(cfg)?;
    let mut rows = Vec::new();
    for &t in ts {
        let p = eta_alpha_psi(&inf, &jet, &spec, x, t)?;
        let compact = compact_form(&inf, &jet, &spec, x, t, true)?;
        rows.push(ProlongRow { t, eta: p.value, mu: p.mu, omega: p.omega, compact, discrepancy: (p.value - compact).abs(), tail: p.tail });
    }
    let report = ProlongReport {
        xi: g.xi.into(),
        tau: g.tau.into(),
        eta: g.eta.into(),
        u: u_src.into(),
        x,
        alpha: cfg.alpha,
        kernel: kernel_label(&cfg.psi),
        rows,
    };
    Ok(Outcome { report, pass: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum System {
    Gfbe,
    Diffusion,
    Gazizov,
    Zhang,
}

pub struct CaseArgs<'a> {
    pub name: &'a str,
    pub p: f64,
    pub b: f64,
    pub c1: f64,
}

impl CaseArgs<'_> {
    fn case(&self) -> Result<Case, CliError> {
        Ok(Case::parse(self.name, self.p, self.b, self.c1)?)
    }
}

/// `table:<label>` or an explicit generator.
pub enum CandidateArg<'a> {
    Table(&'a str),
    Reduced { xi: &'a str, c: [f64; 3], theta: &'a str, rho: &'a str },
    General(GeneralArgs<'a>),
}

fn setup(cfg: &RunConfig, default_tol: f64) -> Result<SystemSetup, CliError> {
    let mut s = SystemSetup::new(prolong_spec(cfg)?, cfg.grid.clone(), cfg.tol.unwrap_or(default_tol));
    s.seed = cfg.seed;
    Ok(s)
}

fn candidate(arg: &CandidateArg<'_>, case: Case, alpha: f64) -> Result<GeneratorCandidate, CliError> {
    match arg {
        CandidateArg::Table(label) => case
            .table(alpha)
            .into_iter()
            .find(|c| c.label.eq_ignore_ascii_case(label))
            .ok_or_else(|| CliError::Config(format!("no row `{label}` in the table for {}", case.label()))),
        CandidateArg::Reduced { xi, c, theta, rho } => {
            let r = ReducedInfinitesimals::new(parse(xi)?, *c, parse(theta)?, parse(rho)?)?;
            Ok(GeneratorCandidate::reduced("explicit", r))
        }
        CandidateArg::General(g) => Ok(GeneratorCandidate::general("explicit", Infinitesimals::parse(g.xi, g.tau, g.eta)?)),
    }
}

pub const SYSTEM_TOL: f64 = 1e-8;

pub fn verify(cfg: &RunConfig, system: System, case: &CaseArgs<'_>, cand: &CandidateArg<'_>) -> Result<Outcome<ResidualReport>, CliError> {
    let case = case.case()?;
    let cand = candidate(cand, case, cfg.alpha)?;
    let setup = setup(cfg, SYSTEM_TOL)?;
    let eq = case.equation();
    let needs_reduced = || {
        cand.as_reduced().map(|_| ()).ok_or_else(|| CliError::Config("this system takes a reduced candidate (--xi, --c, --theta, --rho)".into()))
    };
    let report = match (system, eq) {
        (System::Gfbe, EquationKind::Gfbe { g }) => {
            needs_reduced()?;
            detsys_gfbe(&cand, &g, &setup)?
        }
        (System::Diffusion, EquationKind::Diffusion { k }) => {
            needs_reduced()?;
            detsys_diffusion(&cand, &k, &setup)?
        }
        (System::Gazizov, EquationKind::Gfbe { g }) => detsys_gazizov_rl(&cand.to_general(cfg.alpha), &cand.label, &g, &setup)?,
        (System::Zhang, kind) => detsys_zhang_rl(&cand, &EvolutionEquation::new(kind)?, &setup)?,
        (s, _) => return Err(CliError::Config(format!("case {} does not belong to the {s:?} system", case.label()))),
    };
    Ok(Outcome { pass: report.pass, report })
}

pub struct VerifyTable<'a>(pub &'a ResidualReport);

impl Serialize for VerifyTable<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl Tabular for VerifyTable<'_> {
    fn header(&self) -> Vec<&'static str> {
        vec!["equation", "max_abs", "pass", "x", "t", "u"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        let tol = self.0.tolerance;
        self.0
            .equations
            .iter()
            .map(|e| {
                let mut row = vec![Cell::Text(e.name.clone()), Cell::Num(e.max_abs), Cell::Bool(e.max_abs <= tol)];
                match e.node {
                    Some(n) => row.extend([Cell::Num(n.x), Cell::Num(n.t), Cell::Num(n.u)]),
                    None => row.extend((0..3).map(|_| Cell::Text(String::new()))),
                }
                row
            })
            .collect()
    }
    fn preamble(&self) -> Vec<String> {
        let r = self.0;
        let verdict = if r.pass { "PASS".to_string() } else { format!("FAIL on {}", r.failing().join(", ")) };
        vec![format!("{} / {}: {verdict} at tolerance {:e} over {} nodes", r.system, r.candidate, r.tolerance, r.grid.len())]
    }
}

#[derive(Serialize)]
pub struct Coefficient {
    pub name: String,
    pub value: f64,
}

#[derive(Serialize)]
pub struct SolvedGenerator {
    pub label: String,
    pub coefficients: Vec<Coefficient>,
    pub xi: String,
    pub sigma: String,
    pub theta: String,
    pub rho: String,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub case: String,
    pub alpha: f64,
    pub kernel: String,
    pub generators: Vec<SolvedGenerator>,
    pub table: Vec<String>,
    pub matches_table: bool,
}

impl Tabular for SolveReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["label", "coefficients", "xi", "sigma", "theta", "rho"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.generators
            .iter()
            .map(|g| {
                let coef = g.coefficients.iter().map(|c| format!("{}={}", c.name, short(c.value))).collect::<Vec<_>>().join(" ");
                vec![
                    Cell::Text(g.label.clone()),
                    Cell::Text(coef),
                    Cell::Text(g.xi.clone()),
                    Cell::Text(g.sigma.clone()),
                    Cell::Text(g.theta.clone()),
                    Cell::Text(g.rho.clone()),
                ]
            })
            .collect()
    }
    fn preamble(&self) -> Vec<String> {
        vec![format!(
            "{}: {} generator(s) at order {} with psi = {}; span matches the table ({}): {}",
            self.case,
            self.generators.len(),
            self.alpha,
            self.kernel,
            self.table.join(", "),
            self.matches_table
        )]
    }
}

/// Twelve decimals without trailing zeros.
fn short(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn solve(cfg: &RunConfig, system: System, case: &CaseArgs<'_>) -> Result<Outcome<SolveReport>, CliError> {
    let case = case.case()?;
    match system {
        System::Gfbe if !case.is_diffusion() => {}
        System::Diffusion if case.is_diffusion() => {}
        System::Gfbe | System::Diffusion => return Err(CliError::Config(format!("case {} does not belong to the {system:?} system", case.label()))),
        _ => return Err(CliError::Config("solve supports the gfbe and diffusion systems".into())),
    }
    let setup = setup(cfg, SYSTEM_TOL)?;
    let sol = solve_ansatz(case, &setup)?;
    let table = case.table(cfg.alpha);
    let matches_table = same_span(&sol.generators, &table, cfg.alpha)?;
    let generators = sol
        .generators
        .iter()
        .zip(&sol.basis)
        .map(|(g, q)| {
            let r = g.as_reduced().expect("solver output is reduced");
            SolvedGenerator {
                label: g.label.clone(),
                coefficients: sol
                    .unknowns
                    .iter()
                    .zip(q)
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(n, v)| Coefficient { name: n.to_string(), value: *v })
                    .collect(),
                xi: r.xi.to_string(),
                sigma: r.sigma().to_string(),
                theta: r.theta.to_string(),
                rho: r.rho.to_string(),
            }
        })
        .collect();
    let report = SolveReport {
        case: case.label(),
        alpha: cfg.alpha,
        kernel: kernel_label(&cfg.psi),
        generators,
        table: table.iter().map(|c| c.label.clone()).collect(),
        matches_table,
    };
    Ok(Outcome { pass: matches_table, report })
}

pub const SELFTEST_BUDGET: f64 = 120.0;

#[derive(Serialize)]
pub struct SelftestReport {
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

impl Tabular for SelftestReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["id", "name", "pass", "seconds", "detail"]
    }
    fn rows(&self) -> Vec<Vec<Cell>> {
        self.criteria
            .iter()
            .map(|c| vec![Cell::Int(c.id.into()), Cell::Text(c.name.clone()), Cell::Bool(c.pass), Cell::Num(c.seconds), Cell::Text(c.detail.clone())])
            .collect()
    }
}

pub fn selftest() -> Outcome<SelftestReport> {
    let start = Instant::now();
    let mut criteria = run_all();
    let seconds = start.elapsed().as_secs_f64();
    let failed: Vec<String> = criteria.iter().filter(|c| !c.pass).map(|c| c.id.to_string()).collect();
    let pass = failed.is_empty() && seconds < SELFTEST_BUDGET;
    let detail = format!(
        "suite took {seconds:.2} s (limit {SELFTEST_BUDGET} s); {}",
        if failed.is_empty() { "criteria 1-9 pass".to_string() } else { format!("failing criteria: {}", failed.join(", ")) }
    );
    criteria.push(CriterionResult { id: 10, name: "selftest".into(), pass, detail, seconds });
    Outcome { report: SelftestReport { criteria, pass }, pass }
}
