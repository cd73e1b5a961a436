//! Exact polynomial algebra and the carré du champ calculus.

mod battery;
mod field;
mod gamma;
mod operator;
mod parse;
mod poly;

pub use battery::{random_polynomial, BatterySpec};
pub use field::VectorField;
pub use gamma::{check_commutation, check_symmetry, gamma, gamma2, gamma2_pair, gamma2_z, gamma2_z_pair, gamma_z};
pub use operator::DiffusionOperator;
pub use parse::{parse_poly, parse_rational};
pub use poly::{rat, rat_to_f64, Monomial, NumericPoly, Poly, PolyDisplay, Rational};

/// Default bound on the total degree of any intermediate expansion.
pub const DEFAULT_DEGREE_CAP: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("arity mismatch: expected {expected} variables, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("intermediate degree {degree} exceeds cap {cap}")]
    DegreeOverflow { degree: u32, cap: u32 },
    #[error("parse error at byte {pos} in {input:?}: {message}")]
    Parse { input: String, pos: usize, message: String },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("vector field {index} is not divergence free (divergence {divergence})")]
    NotDivergenceFree { index: usize, divergence: String },
    #[error("operator has an empty horizontal frame")]
    EmptyFrame,
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
}
