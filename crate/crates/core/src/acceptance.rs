//! The acceptance suite: one verdict per criterion with a short measurement
//! summary. Shared by the CLI `selftest` command and the integration tests.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classical;
use crate::error::Result;
use crate::expr::{parse, Expr, Var};
use crate::fracops::{
    frac_derivative, frac_derivative_series, frac_integral, frac_integral_series, leibniz_product, FractionalOrder,
    QuadratureSpec,
};
use crate::jet::{JetFunction, SolutionJet};
use crate::prolong::{eta_alpha_psi, mu_term, omega_term, Infinitesimals, ProlongSpec, ReducedInfinitesimals};
use crate::psi::{Builtin, PsiFunction};
use crate::special::{gamma, rgamma};
use crate::symmetry::{
    detsys_diffusion, detsys_gazizov_rl, detsys_gfbe, detsys_zhang_rl, same_span, solve_ansatz, Case, EquationKind,
    EvolutionEquation, GeneratorCandidate, Grid, SystemSetup,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict}  {} ({:.2} s): {}", self.id, self.name, self.seconds, self.detail)
    }
}

fn timed(id: u8, name: &str, budget: Option<f64>, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut pass, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = budget {
        if seconds > limit {
            pass = false;
            detail.push_str(&format!("; over the {limit} s budget"));
        }
    }
    CriterionResult { id, name: name.into(), pass, detail, seconds }
}

fn kernels(width: f64) -> Result<Vec<(&'static str, PsiFunction)>> {
    Ok(vec![
        ("identity", PsiFunction::builtin(Builtin::Identity, 0.0, width)?),
        ("power(2)", PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 1.0, 1.0 + width)?),
        ("exponential", PsiFunction::builtin(Builtin::Exponential, 0.0, width)?),
    ])
}

fn interior(psi: &PsiFunction) -> Vec<f64> {
    (1..=10).map(|i| psi.a() + 0.08 * i as f64).collect()
}

/// Power rule `D^{α;ψ} P^β = Γ(β+1)/Γ(β+1−α) P^{β−α}` on the quadrature backend.
pub fn criterion_1() -> CriterionResult {
    timed(1, "power rule", Some(5.0), || {
        let mut worst = 0.0f64;
        for (_, psi) in kernels(1.0)? {
            for alpha in [0.3, 0.5, 1.5] {
                let order = FractionalOrder::new(alpha)?;
                for beta in [1.0, 2.5] {
                    let f = JetFunction::new(Expr::psi().powf(beta));
                    for t in interior(&psi) {
                        let p = psi.kernel(t)?;
                        let exact = gamma(beta + 1.0)? * rgamma(beta + 1.0 - alpha) * p.powf(beta - alpha);
                        let v = frac_derivative(&f, &psi, order, t, QuadratureSpec::default(), None)?;
                        worst = worst.max((v - exact).abs() / exact.abs());
                    }
                }
            }
        }
        Ok((worst <= 1e-6, format!("max relative error {worst:.2e} (limit 1e-6)")))
    })
}

/// Quadrature against the `N = 30` series, for integral and derivative.
pub fn criterion_2() -> CriterionResult {
    timed(2, "backend agreement", Some(10.0), || {
        let funcs = ["1", "t", "t^2", "exp(t)"];
        let (mut worst_i, mut worst_d) = (0.0f64, 0.0f64);
        for (_, psi) in kernels(1.0)? {
            for src in funcs {
                let f = JetFunction::parse(src)?;
                for t in interior(&psi) {
                    for alpha in [0.3, 0.5, 1.5] {
                        let q = frac_integral(&f, &psi, alpha, t, QuadratureSpec::default())?;
                        let s = frac_integral_series(&f, &psi, alpha, t, 30)?.value;
                        worst_i = worst_i.max((q - s).abs() / (1.0 + s.abs()));
                        let order = FractionalOrder::new(alpha)?;
                        let q = frac_derivative(&f, &psi, order, t, QuadratureSpec::default(), None)?;
                        let s = frac_derivative_series(&f, &psi, order, t, 30)?.value;
                        worst_d = worst_d.max((q - s).abs() / (1.0 + s.abs()));
                    }
                }
            }
        }
        let pass = worst_i <= 1e-8 && worst_d <= 1e-5;
        Ok((pass, format!("integral {worst_i:.2e} (limit 1e-8), derivative {worst_d:.2e} (limit 1e-5), abs+rel")))
    })
}

/// The truncated Leibniz sum for polynomials in `P` converges by `N = 10`,
/// monotonically. Every `(kernel, α, pair, t)` whose error grows between
/// consecutive `N` is listed.
pub fn criterion_3() -> CriterionResult {
    timed(3, "Leibniz convergence", None, || {
        let pairs = [("psi", "psi"), ("1 + psi + psi^2", "2 - psi + psi^3"), ("psi^3 - 2*psi", "1 + psi^2")];
        let mut worst_final = 0.0f64;
        let mut rises = Vec::new();
        for (kname, psi) in kernels(1.0)? {
            for alpha in [0.5, 1.5] {
                let order = FractionalOrder::new(alpha)?;
                for (fs, gs) in pairs {
                    let (f, g) = (JetFunction::parse(fs)?, JetFunction::parse(gs)?);
                    let fg = JetFunction::new(f.expr().clone() * g.expr().clone());
                    for t in [psi.a() + 0.3, psi.a() + 0.7] {
                        let direct = frac_derivative(&fg, &psi, order, t, QuadratureSpec::default(), None)?;
                        let mut prev = f64::INFINITY;
                        for n in 1..=10 {
                            let s = leibniz_product(&f, &g, &psi, order, t, n, QuadratureSpec::default())?.value;
                            let err = (s - direct).abs();
                            if err > prev + 1e-12 {
                                rises.push(format!("({fs})({gs}) {kname} alpha={alpha} t={t:.1} N={}->{n}: {prev:.2e}->{err:.2e}", n - 1));
                            }
                            prev = err;
                        }
                        worst_final = worst_final.max(prev);
                    }
                }
            }
        }
        let pass = rises.is_empty() && worst_final <= 1e-6;
        let mono = if rises.is_empty() { "monotone throughout".to_string() } else { format!("error rises at {}", rises.join("; ")) };
        Ok((pass, format!("error at N=10 {worst_final:.2e} (limit 1e-6); {mono}")))
    })
}

/// Expanded prolongation at `ψ = t`, `a = 0` against the classical formula.
pub fn criterion_4() -> CriterionResult {
    timed(4, "classical reduction", None, || {
        let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5)?;
        let jets = ["1 + x*t + t^2", "x^2 + t^3 + 2"];
        let mut worst = 0.0f64;
        let mut count = 0;
        for alpha in [0.3, 0.5, 0.8] {
            let spec = ProlongSpec::new(psi.clone(), alpha)?;
            let gens = [
                Infinitesimals::parse("x", &format!("2*t/{alpha}"), "-u")?,
                Infinitesimals::parse("1 + x*t", "t^2", "t*u + x")?,
                Infinitesimals::parse("x", "t", "u^2 + t*x")?,
            ];
            for inf in &gens {
                for src in jets {
                    let jet = SolutionJet::parse(src)?;
                    for (x, t) in [(0.4, 0.5), (0.8, 0.9)] {
                        let v = eta_alpha_psi(inf, &jet, &spec, x, t)?.value;
                        let (c, _) = classical::eta_alpha(inf, &jet, alpha, x, t, spec.terms)?;
                        worst = worst.max((v - c).abs() / c.abs().max(1.0));
                        count += 1;
                    }
                }
            }
        }
        Ok((worst <= 1e-8, format!("{count} evaluations, max discrepancy {worst:.2e} (limit 1e-8)")))
    })
}

/// `(D_s u)²` coefficient of μ, extracted from μ on the jets `u0 ± λP`.
pub fn mu_square_coefficient(inf: &Infinitesimals, spec: &ProlongSpec, x: f64, t: f64, u0: f64) -> Result<f64> {
    let lam = 1.0;
    let jet = |l: f64| SolutionJet::new(JetFunction::new(Expr::Const(u0) + Expr::Const(l) * Expr::psi()));
    let m = |l: f64| mu_term(inf, &jet(l)?, spec, x, t, 10);
    Ok((m(lam)? + m(-lam)? - 2.0 * m(0.0)?) / (2.0 * lam * lam))
}

/// `μ = 0` for `η` linear in `u`; the `(D_s u)²` law for quadratic `η`.
pub fn criterion_5() -> CriterionResult {
    timed(5, "mu law", None, || {
        let mut linear_max = 0.0f64;
        let mut coef_err = 0.0f64;
        let jets = [SolutionJet::parse("1 + x*t + t^2")?, SolutionJet::parse("exp(x)*psi^2 + psi + 1")?];
        let linear = [
            Infinitesimals::parse("x", "t", "x*u + t^2")?,
            Infinitesimals::parse("1", "0", "psi*u - 3")?,
            Infinitesimals::parse("x*t", "t^2", "exp(t)*u + x")?,
        ];
        let quadratic = [Infinitesimals::parse("0", "0", "u^2")?, Infinitesimals::parse("0", "0", "psi*u^2")?];
        for psi in [PsiFunction::builtin(Builtin::Identity, 0.0, 1.5)?, PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5)?] {
            for alpha in [0.3, 0.5, 1.5] {
                let spec = ProlongSpec::new(psi.clone(), alpha)?;
                for t in [0.4, 0.9] {
                    for inf in &linear {
                        for jet in &jets {
                            linear_max = linear_max.max(mu_term(inf, jet, &spec, 0.6, t, 10)?.abs());
                        }
                    }
                    for inf in &quadratic {
                        let got = mu_square_coefficient(inf, &spec, 0.6, t, 1.3)?;
                        let etauu = JetFunction::new(inf.eta().diff_n(Var::U, 2));
                        let expect = 0.5 * alpha * (alpha - 1.0) * frac_integral(&etauu, &psi, 2.0 - alpha, t, spec.quad)?;
                        coef_err = coef_err.max((got - expect).abs() / expect.abs().max(1e-300));
                    }
                }
            }
        }
        let pass = linear_max <= 1e-12 && coef_err <= 1e-6;
        Ok((pass, format!("linear eta |mu| max {linear_max:.1e} (limit 1e-12); (D_s u)^2 coefficient relative error {coef_err:.2e} (limit 1e-6)")))
    })
}

/// `ω` vanishes without terminal motion and is visible with `τ(a) = 1`.
pub fn criterion_6() -> CriterionResult {
    timed(6, "omega law", None, || {
        let probe = crate::symmetry::probe_jet(crate::symmetry::DEFAULT_SEED);
        let grid = Grid::standard(0.0);
        let mut zero_ok = true;
        let mut largest = 0.0f64;
        for psi in [PsiFunction::builtin(Builtin::Identity, 0.0, 1.5)?, PsiFunction::builtin(Builtin::Exponential, 0.0, 1.5)?] {
            let spec = ProlongSpec::new(psi.clone(), 0.5)?;
            let still = [Infinitesimals::parse("x", "t", "u")?, Infinitesimals::parse("1", "t^2 + x*t", "0")?];
            let moving = Infinitesimals::parse("0", "1", "0")?;
            for &x in &grid.x {
                for &t in &grid.t {
                    for inf in &still {
                        zero_ok &= omega_term(inf, &probe, &spec, x, t)? == 0.0;
                    }
                }
            }
            for &t in &grid.t {
                largest = largest.max(omega_term(&moving, &probe, &spec, 0.5, t)?.abs());
            }
        }
        let pass = zero_ok && largest >= 1e-3;
        Ok((pass, format!("exact zero without terminal motion: {zero_ok}; max |omega| with tau(a)=1: {largest:.3e} (needs >= 1e-3)")))
    })
}

fn check_rows(cases: &[(&str, Case)], kernels: &[(&str, PsiFunction)], alpha: f64) -> Result<(Vec<String>, Vec<String>)> {
    let (mut ok, mut bad) = (Vec::new(), Vec::new());
    for (kname, psi) in kernels {
        let setup = SystemSetup::standard(ProlongSpec::new(psi.clone(), alpha)?);
        for (row, case) in cases {
            let table = case.table(alpha);
            for cand in &table {
                let rep = match case.equation() {
                    EquationKind::Gfbe { g } => detsys_gfbe(cand, &g, &setup)?,
                    EquationKind::Diffusion { k } => detsys_diffusion(cand, &k, &setup)?,
                    EquationKind::Custom { .. } => unreachable!("table rows are built in"),
                };
                let tag = format!("{row}:{}@{kname}", cand.label);
                if rep.pass {
                    ok.push(tag);
                } else {
                    bad.push(format!("{tag} fails {}", rep.failing().join(",")));
                }
            }
            let solved = solve_ansatz(*case, &setup)?;
            if !same_span(&solved.generators, &table, alpha)? {
                bad.push(format!("{row}@{kname} solve gives {} generator(s), span differs", solved.generators.len()));
            }
        }
    }
    Ok((ok, bad))
}

fn symmetry_kernels() -> Result<Vec<(&'static str, PsiFunction)>> {
    Ok(vec![
        ("identity", PsiFunction::builtin(Builtin::Identity, 0.0, 1.5)?),
        ("power(2)", PsiFunction::builtin(Builtin::Power { rho: 2.0 }, 0.5, 2.0)?),
    ])
}

/// The Burgers table rows and `∂x` against system (i)–(v), and the solver.
pub fn criterion_7() -> CriterionResult {
    timed(7, "Burgers table", Some(30.0), || {
        let cases = [
            ("u", Case::BurgersU),
            ("u^p", Case::BurgersPower { p: 3.0 }),
            ("e^{bu}", Case::BurgersExp { b: 2.0 }),
            ("u/(1+u)", Case::BurgersRational),
        ];
        let (ok, bad) = check_rows(&cases, &symmetry_kernels()?, 0.5)?;
        let detail = if bad.is_empty() {
            format!("{} row checks pass", ok.len())
        } else {
            format!("{} row checks pass; failing: {}", ok.len(), bad.join("; "))
        };
        Ok((bad.is_empty(), detail))
    })
}

/// Constant diffusivity basis and the power-law generator.
pub fn criterion_8() -> CriterionResult {
    timed(8, "diffusion", None, || {
        let kernels = symmetry_kernels()?;
        let (_, mut bad) = check_rows(&[("K=1", Case::DiffusionConstant)], &kernels, 0.5)?;
        let mut basis4 = true;
        for (_, psi) in &kernels {
            let setup = SystemSetup::standard(ProlongSpec::new(psi.clone(), 0.5)?);
            basis4 &= solve_ansatz(Case::DiffusionConstant, &setup)?.generators.len() == 4;
        }
        for c1 in [0.0, 1.0] {
            let case = Case::DiffusionPowerLaw { c1 };
            let gen = &case.table(0.5)[1];
            let EquationKind::Diffusion { k } = case.equation() else { unreachable!() };
            for (kname, psi) in &kernels {
                let setup = SystemSetup::standard(ProlongSpec::new(psi.clone(), 0.5)?);
                let rep = detsys_diffusion(gen, &k, &setup)?;
                if !rep.pass {
                    bad.push(format!("power law c1={c1}@{kname} fails {} (max {:.2e})", rep.failing().join(","), rep.max_residual()));
                }
            }
        }
        let pass = bad.is_empty() && basis4;
        let detail = format!("K=1 solve has four generators: {basis4}; {}", if bad.is_empty() { "all checks pass".into() } else { bad.join("; ") });
        Ok((pass, detail))
    })
}

/// The six-candidate panel for `g = u`.
pub fn panel(alpha: f64) -> Vec<GeneratorCandidate> {
    let r = |xi: &str, c: [f64; 3], theta: &str, rho: &str| {
        ReducedInfinitesimals::new(parse(xi).unwrap(), c, parse(theta).unwrap(), parse(rho).unwrap()).unwrap()
    };
    let s = 2.0 / alpha;
    vec![
        GeneratorCandidate::reduced("d_x", r("1", [0.0; 3], "0", "0")),
        GeneratorCandidate::reduced("X2", r("x", [0.0, s, 0.0], "-1", "0")),
        GeneratorCandidate::reduced("X2 theta=+1", r("x", [0.0, s, 0.0], "1", "0")),
        GeneratorCandidate::reduced("X2 + t^2", r("x", [0.0, s, 1.0], "-1", "0")),
        GeneratorCandidate::reduced("u d_u", r("0", [0.0; 3], "1", "0")),
        GeneratorCandidate::reduced("d_u", r("0", [0.0; 3], "0", "1")),
    ]
}

/// Verdicts `(label, zhang, gazizov, gfbe)` on the panel.
pub fn panel_verdicts(alpha: f64) -> Result<Vec<(String, bool, bool, bool)>> {
    let psi = PsiFunction::builtin(Builtin::Identity, 0.0, 1.5)?;
    let setup = SystemSetup::standard(ProlongSpec::new(psi, alpha)?);
    let g = Expr::u();
    let eq = EvolutionEquation::new(EquationKind::Gfbe { g: g.clone() })?;
    panel(alpha)
        .iter()
        .map(|c| {
            let z = detsys_zhang_rl(c, &eq, &setup)?.pass;
            let gz = detsys_gazizov_rl(&c.to_general(alpha), &c.label, &g, &setup)?.pass;
            let gf = detsys_gfbe(c, &g, &setup)?.pass;
            Ok((c.label.clone(), z, gz, gf))
        })
        .collect()
}

pub fn criterion_9() -> CriterionResult {
    timed(9, "method agreement", None, || {
        let v = panel_verdicts(0.5)?;
        let agree = v.iter().all(|(_, z, g, _)| z == g);
        let classical = v.iter().all(|(_, _, g, f)| g == f);
        let accepted: Vec<&str> = v.iter().filter(|r| r.1).map(|r| r.0.as_str()).collect();
        Ok((agree, format!("zhang = gazizov on all 6: {agree}; gfbe agrees too: {classical}; accepted: {}", accepted.join(", "))))
    })
}

/// Criteria 1 to 9 in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}
