//! Published generators used as fixtures.

use super::{EquationKind, GeneratorCandidate};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::prolong::ReducedInfinitesimals;
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Case {
    /// `g = u`.
    BurgersU,
    /// `g = u^p`, `p > 1`.
    BurgersPower { p: f64 },
    /// `g = e^{bu}`, `b ≠ 0`.
    BurgersExp { b: f64 },
    /// `g = u/(1 + u)`.
    BurgersRational,
    /// `g = (1 + u)/u`.
    BurgersRationalInverse,
    /// `K = 1`.
    DiffusionConstant,
    /// `K = (c1 + 3u)^{−4/3}`.
    DiffusionPowerLaw { c1: f64 },
}

impl Case {
    /// Case by name: `u`, `u^p`, `e^{bu}`, `u/(1+u)`, `(1+u)/u`, `K=1`, `K=power-law`.
    pub fn parse(name: &str, p: f64, b: f64, c1: f64) -> Result<Self> {
        let case = match name.replace(' ', "").as_str() {
            "u" | "g=u" => Case::BurgersU,
            "u^p" | "g=u^p" => Case::BurgersPower { p },
            "e^{bu}" | "exp" | "g=e^{bu}" => Case::BurgersExp { b },
            "u/(1+u)" | "g=u/(1+u)" => Case::BurgersRational,
            "(1+u)/u" | "g=(1+u)/u" => Case::BurgersRationalInverse,
            "K=1" | "k=1" => Case::DiffusionConstant,
            "K=power-law" | "k=power-law" | "power-law" => Case::DiffusionPowerLaw { c1 },
            other => return Err(Error::Invalid(format!("unknown case `{other}`"))),
        };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Case::BurgersPower { p } if !(p > 1.0) => Err(Error::Invalid(format!("u^p needs p > 1, got {p}"))),
            Case::BurgersExp { b } if b == 0.0 || !b.is_finite() => Err(Error::Invalid("e^{bu} needs b ≠ 0".into())),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Case::BurgersU => "g=u".into(),
            Case::BurgersPower { p } => format!("g=u^{p}"),
            Case::BurgersExp { b } => format!("g=e^({b}u)"),
            Case::BurgersRational => "g=u/(1+u)".into(),
            Case::BurgersRationalInverse => "g=(1+u)/u".into(),
            Case::DiffusionConstant => "K=1".into(),
            Case::DiffusionPowerLaw { c1 } => format!("K=({c1}+3u)^(-4/3)"),
        }
    }

    pub fn equation(&self) -> EquationKind {
        let e = |s: String| parse(&s).expect("fixed case expression");
        match *self {
            Case::BurgersU => EquationKind::Gfbe { g: Expr::u() },
            Case::BurgersPower { p } => EquationKind::Gfbe { g: e(format!("u^({p})")) },
            Case::BurgersExp { b } => EquationKind::Gfbe { g: e(format!("exp(({b})*u)")) },
            Case::BurgersRational => EquationKind::Gfbe { g: e("u/(1+u)".into()) },
            Case::BurgersRationalInverse => EquationKind::Gfbe { g: e("(1+u)/u".into()) },
            Case::DiffusionConstant => EquationKind::Diffusion { k: Expr::Const(1.0) },
            Case::DiffusionPowerLaw { c1 } => EquationKind::Diffusion { k: e(format!("(({c1}) + 3*u)^(-4/3)")) },
        }
    }

    pub fn is_diffusion(&self) -> bool {
        matches!(self, Case::DiffusionConstant | Case::DiffusionPowerLaw { .. })
    }

    /// The published generators, `X1 = ∂x` first.
    pub fn table(&self, alpha: f64) -> Vec<GeneratorCandidate> {
        let mut out = vec![translation()];
        let scaling = |theta: f64, rho: f64| {
            let r = ReducedInfinitesimals::new(Expr::x(), [0.0, 2.0 / alpha, 0.0], Expr::Const(theta), Expr::Const(rho));
            GeneratorCandidate::reduced("X2", r.expect("fixed fixture"))
        };
        match *self {
            Case::BurgersU => out.push(scaling(-1.0, 0.0)),
            Case::BurgersPower { p } => out.push(scaling(-1.0 / p, 0.0)),
            Case::BurgersExp { b } => out.push(scaling(0.0, -1.0 / b)),
            Case::BurgersRational | Case::BurgersRationalInverse => out.push(scaling(1.0, 0.0)),
            Case::DiffusionConstant => {
                out.push(scaling(0.0, 0.0));
                out.push(reduced("X3", "0", [0.0; 3], "1", "0"));
                out.push(GeneratorCandidate::reduced("X4", heat_eigen_rho(alpha)));
            }
            Case::DiffusionPowerLaw { c1 } => {
                out.push(reduced("X2", "x^2", [0.0; 3], "-3*x", &format!("-({c1})*x")));
            }
        }
        out
    }
}

fn reduced(label: &str, xi: &str, c: [f64; 3], theta: &str, rho: &str) -> GeneratorCandidate {
    let r = ReducedInfinitesimals::new(parse(xi).unwrap(), c, parse(theta).unwrap(), parse(rho).unwrap()).expect("fixed fixture");
    GeneratorCandidate::reduced(label, r)
}

pub(crate) fn translation() -> GeneratorCandidate {
    reduced("X1", "1", [0.0; 3], "0", "0")
}

/// `ρ = x² P^{α−1} + (2Γ(α)/Γ(2α)) P^{2α−1}`, which solves `D^{α;ψ}ρ = ρ_xx`
/// by the power rule since `D^{α;ψ} P^{α−1} = 0`.
pub(crate) fn heat_eigen_expr(alpha: f64) -> Expr {
    let c = 2.0 * gamma(alpha).expect("α > 0") / gamma(2.0 * alpha).expect("α > 0");
    let p = Expr::psi();
    Expr::x().powf(2.0) * p.clone().powf(alpha - 1.0) + Expr::Const(c) * p.powf(2.0 * alpha - 1.0)
}

fn heat_eigen_rho(alpha: f64) -> ReducedInfinitesimals {
    ReducedInfinitesimals::new(Expr::zero(), [0.0; 3], Expr::zero(), heat_eigen_expr(alpha)).expect("fixed fixture")
}

#[derive(Debug, Clone)]
pub struct TableEntry {
    pub key: &'static str,
    pub case: Option<Case>,
    pub generators: Vec<GeneratorCandidate>,
}

/// All fixtures. `p`, `b` and `c1` fill the parametric rows.
pub fn builtin_table(alpha: f64, p: f64, b: f64, c1: f64) -> Vec<TableEntry> {
    let mut out = vec![TableEntry { key: "arbitrary g", case: None, generators: vec![translation()] }];
    let cases = [
        ("u", Case::BurgersU),
        ("u^p", Case::BurgersPower { p }),
        ("e^{bu}", Case::BurgersExp { b }),
        ("u/(1+u)", Case::BurgersRational),
        ("(1+u)/u", Case::BurgersRationalInverse),
        ("K=1", Case::DiffusionConstant),
        ("K=power-law", Case::DiffusionPowerLaw { c1 }),
    ];
    out.extend(cases.into_iter().map(|(key, case)| TableEntry { key, case: Some(case), generators: case.table(alpha) }));
    out
}

/// Generators of a row; `arbitrary g` gives `∂x` alone.
pub fn lookup(key: &str, alpha: f64, p: f64, b: f64, c1: f64) -> Result<Vec<GeneratorCandidate>> {
    builtin_table(alpha, p, b, c1)
        .into_iter()
        .find(|e| e.key == key)
        .map(|e| e.generators)
        .ok_or_else(|| Error::Invalid(format!("unknown table row `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_row_shape() {
        let gens = lookup("e^{bu}", 0.5, 2.0, 2.0, 0.0).unwrap();
        let r = gens[1].as_reduced().unwrap();
        assert_eq!((r.c1, r.rho.as_const()), (4.0, Some(-0.5)));
        assert_eq!(lookup("arbitrary g", 0.5, 2.0, 1.0, 0.0).unwrap().len(), 1);
        assert!(lookup("nope", 0.5, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn case_parameters_are_validated() {
        assert!(Case::parse("u^p", 1.0, 1.0, 0.0).is_err());
        assert!(Case::parse("e^{bu}", 2.0, 0.0, 0.0).is_err());
        assert_eq!(Case::parse("K=1", 2.0, 1.0, 0.0).unwrap(), Case::DiffusionConstant);
    }
}
