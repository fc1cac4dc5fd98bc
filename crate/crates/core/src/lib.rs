//! ψ-Riemann–Liouville fractional operators, Lie prolongation formulas and
//! the determining systems of time-fractional evolution equations.

pub mod acceptance;
pub mod classical;
pub mod error;
pub mod expr;
pub mod fracops;
pub mod jet;
pub mod prolong;
pub mod psi;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod symmetry;

pub use error::{Error, Result};
