//! Run configuration: built-in defaults, then the TOML file, then flags.

use std::path::Path;

use psifrac::expr::parse;
use psifrac::psi::{Builtin, PsiFunction};
use psifrac::symmetry::{Grid, DEFAULT_SEED};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Human,
}

/// `[psi]` table of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    pub family: Option<String>,
    /// `[rho]` for `power`, `[c, d]` for `affine`.
    #[serde(default)]
    pub params: Vec<f64>,
    /// Kernel expression in `t` for `custom`.
    pub expr: Option<String>,
    pub max_order: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

/// `[grid]` table: absolute ranges and points per axis.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub x: Option<(f64, f64)>,
    pub t: Option<(f64, f64)>,
    pub u: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: Option<f64>,
    pub nodes: Option<usize>,
    pub terms: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    #[serde(default)]
    pub psi: PsiConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub nodes: Option<usize>,
    pub terms: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub psi: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub psi: PsiFunction,
    pub alpha: f64,
    pub nodes: usize,
    pub terms: usize,
    /// `None` means the command default.
    pub tol: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub grid: Grid,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// `family[:p1,p2,...]`, e.g. `power:2` or `affine:2,1`; `custom:<expr>`
/// takes the rest as the kernel expression.
fn split_family(spec: &str) -> Result<(String, Vec<f64>, Option<String>), CliError> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim().to_lowercase(), Some(r.trim())),
        None => (spec.trim().to_lowercase(), None),
    };
    if name == "custom" {
        return Ok((name, Vec::new(), rest.map(str::to_string)));
    }
    let params = match rest {
        Some(r) if !r.is_empty() => r
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| config_err(format!("bad kernel parameter `{p}`"))))
            .collect::<Result<_, _>>()?,
        _ => Vec::new(),
    };
    Ok((name, params, None))
}

fn param(params: &[f64], i: usize, family: &str) -> Result<f64, CliError> {
    params.get(i).copied().ok_or_else(|| config_err(format!("kernel `{family}` needs {} parameter(s)", i + 1)))
}

fn build_psi(family: &str, params: &[f64], expr: Option<&str>, max_order: Option<usize>, a: f64, b: f64) -> Result<PsiFunction, CliError> {
    let builtin = match family {
        "identity" => Some(Builtin::Identity),
        "exponential" | "exp" => Some(Builtin::Exponential),
        "power" => Some(Builtin::Power { rho: param(params, 0, family)? }),
        "affine" => Some(Builtin::Affine { c: param(params, 0, family)?, d: param(params, 1, family)? }),
        "custom" => None,
        other => return Err(config_err(format!("unknown kernel family `{other}`"))),
    };
    let psi = match builtin {
        Some(f) => PsiFunction::builtin(f, a, b).map_err(config_err)?,
        None => {
            let src = expr.ok_or_else(|| config_err("custom kernel needs an expression"))?;
            let psi = PsiFunction::custom(parse(src).map_err(config_err)?, a, b, max_order).map_err(config_err)?;
            psi.validate(64).map_err(|v| config_err(format!("custom kernel rejected: {v:?}")))?;
            psi
        }
    };
    Ok(psi)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, o: Overrides) -> Result<Self, CliError> {
        let (family, params, expr) = match &o.psi {
            Some(spec) => split_family(spec)?,
            None => (
                file.psi.family.clone().unwrap_or_else(|| "identity".into()).to_lowercase(),
                file.psi.params.clone(),
                file.psi.expr.clone(),
            ),
        };
        let a = o.a.or(file.psi.a).unwrap_or(0.0);
        let b = o.b.or(file.psi.b).unwrap_or(a + 1.5);
        let psi = build_psi(&family, &params, expr.as_deref(), file.psi.max_order, a, b)?;

        let alpha = o.alpha.or(file.alpha).unwrap_or(0.5);
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(config_err(format!("alpha must be positive, got {alpha}")));
        }
        let nodes = o.nodes.or(file.nodes).unwrap_or(64);
        if nodes < 4 {
            return Err(config_err(format!("at least 4 quadrature nodes required, got {nodes}")));
        }
        let terms = o.terms.or(file.terms).unwrap_or(20);
        if terms == 0 {
            return Err(config_err("terms must be at least 1"));
        }
        let tol = o.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(config_err(format!("tolerance must be positive, got {t}")));
            }
        }

        let g = &file.grid;
        let n = g.n.unwrap_or(5);
        if n == 0 {
            return Err(config_err("grid needs at least one point per axis"));
        }
        let (xl, xh) = g.x.unwrap_or((0.2, 1.0));
        let (tl, th) = g.t.unwrap_or((a + 0.2, a + 1.0));
        let (ul, uh) = g.u.unwrap_or((0.5, 2.0));
        let grid = Grid::new(linspace(xl, xh, n), linspace(tl, th, n), linspace(ul, uh, n)).map_err(config_err)?;
        grid.check(&psi).map_err(config_err)?;

        Ok(Self {
            psi,
            alpha,
            nodes,
            terms,
            tol,
            seed: o.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            format: o.format.or(file.format).unwrap_or_default(),
            grid,
        })
    }
}
