//! `psifrac`: evaluate ψ-fractional operators, prolongations and determining
//! systems from the command line.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 configuration error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::commands::{CandidateArg, CaseArgs, GeneralArgs, Op, System, VerifyTable};
use crate::config::{ConfigFile, Format, Overrides, RunConfig};
use crate::output::{render, Tabular};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(psifrac::Error),
}

impl From<psifrac::Error> for CliError {
    /// Bad inputs are configuration errors; failures of an evaluation on
    /// valid inputs are numerical ones.
    fn from(e: psifrac::Error) -> Self {
        use psifrac::Error::*;
        match e {
            Pole(_) | Stencil { .. } | Quadrature(_) | NonFinite(_) => CliError::Numerical(e),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "psifrac", version, about = "psi-Riemann-Liouville operators, prolongations and symmetry checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Flags override the config file, which overrides the built-in defaults.
#[derive(Args)]
struct Global {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Pass threshold of leibniz, verify and solve.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Gauss-Jacobi nodes.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Series truncation N.
    #[arg(long, global = true)]
    terms: Option<usize>,
    /// Seed of the solution probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fractional order.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Kernel: identity, exponential, power:<rho>, affine:<c>,<d> or custom:<expr in t>.
    #[arg(long, global = true)]
    psi: Option<String>,
    /// Left endpoint.
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Right endpoint.
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
}

#[derive(Args)]
struct CaseFlags {
    /// u, u^p, e^{bu}, u/(1+u), (1+u)/u, K=1 or K=power-law.
    #[arg(long, default_value = "u")]
    case: String,
    /// Exponent of the u^p row.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Rate b of the e^{bu} row.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    rate: f64,
    /// Constant of the power-law diffusivity.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c1: f64,
}

impl CaseFlags {
    fn args(&self) -> CaseArgs<'_> {
        CaseArgs { name: &self.case, p: self.p, b: self.rate, c1: self.c1 }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integral or derivative on both backends.
    Eval {
        #[arg(value_enum)]
        op: Op,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Truncated Leibniz sum against the direct derivative of the product.
    Leibniz {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
        n: Vec<usize>,
    },
    /// Extended prolongation coefficient with its μ and ω parts.
    Prolong {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        xi: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        eta: String,
        /// Solution jet u(x, t).
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, default_value_t = 0.5)]
        x: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Residuals of a determining system for one candidate.
    Verify {
        #[arg(long, value_enum)]
        equation: System,
        #[command(flatten)]
        case: CaseFlags,
        /// `table:<label>` or `explicit`.
        #[arg(long)]
        candidate: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        xi: String,
        /// Coefficients c0,c1,c2 of σ = c0 + c1 psi + c2 psi^2.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        c: Vec<f64>,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        rho: String,
        /// General form: time component (switches off the reduced flags).
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        /// General form: u component.
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
    },
    /// Admitted generators from the linear ansatz.
    Solve {
        #[arg(long, value_enum)]
        equation: System,
        #[command(flatten)]
        case: CaseFlags,
    },
    /// The acceptance suite.
    Selftest,
}

fn emit<T: Tabular>(report: &T, format: Format) {
    print!("{}", render(report, format));
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let overrides = Overrides {
        alpha: g.alpha,
        nodes: g.nodes,
        terms: g.terms,
        tol: g.tol,
        seed: g.seed,
        format: g.format,
        psi: g.psi,
        a: g.a,
        b: g.b,
    };
    let cfg = RunConfig::resolve(file, overrides)?;
    let fmt = cfg.format;
    let pass = match &cli.command {
        Command::Eval { op, f, t } => {
            let o = commands::eval(&cfg, *op, f, t)?;
            emit(&o.report, fmt);
            o.pass
        }
        Command::Leibniz { f, g, t, n } => {
            let o = commands::leibniz(&cfg, f, g, t, n)?;
            emit(&o.report, fmt);
            o.pass
        }
        Command::Prolong { xi, tau, eta, u, x, t } => {
            let o = commands::prolong(&cfg, GeneralArgs { xi, tau, eta }, u, *x, t)?;
            emit(&o.report, fmt);
            o.pass
        }
        Command::Verify { equation, case, candidate, xi, c, theta, rho, tau, eta } => {
            let cand = if let Some(label) = candidate.strip_prefix("table:") {
                CandidateArg::Table(label)
            } else if candidate == "explicit" {
                if tau.is_some() || eta.is_some() {
                    let (tau, eta) = (tau.as_deref().unwrap_or("0"), eta.as_deref().unwrap_or("0"));
                    CandidateArg::General(GeneralArgs { xi, tau, eta })
                } else {
                    let c = match c.as_slice() {
                        [] => [0.0; 3],
                        [c0, c1, c2] => [*c0, *c1, *c2],
                        _ => return Err(CliError::Config("--c takes three values c0,c1,c2".into())),
                    };
                    CandidateArg::Reduced { xi, c, theta, rho }
                }
            } else {
                return Err(CliError::Config(format!("candidate must be `table:<label>` or `explicit`, got `{candidate}`")));
            };
            let o = commands::verify(&cfg, *equation, &case.args(), &cand)?;
            emit(&VerifyTable(&o.report), fmt);
            o.pass
        }
        Command::Solve { equation, case } => {
            let o = commands::solve(&cfg, *equation, &case.args())?;
            emit(&o.report, fmt);
            o.pass
        }
        Command::Selftest => {
            let o = commands::selftest();
            match fmt {
                Format::Human => o.report.criteria.iter().for_each(|c| println!("{c}")),
                _ => emit(&o.report, fmt),
            }
            o.pass
        }
    };
    Ok(pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("psifrac: {e}");
            ExitCode::from(e.code())
        }
    }
}
