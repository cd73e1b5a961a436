//! Grid discretization, heat semigroup and the semigroup-inequality registry.

mod battery;
mod functionals;
pub(crate) mod grid;
mod linalg;
mod propagate;
mod registry;
mod sparse;
mod spectral;

pub use battery::{heisenberg_battery, ou_battery, TestFunction};
pub use functionals::{entropy, exp_moment, fisher, fisher_vertical, floor_eps, integrate, lp_norm, variance, EPSILON};
pub use grid::{check_invariants, chain_gamma, discretize, Axis, AxisSpec, Boundary, GridModel, GridSpec};
pub use linalg::{cg, dot_mu};
pub use propagate::{heat_kernel, semigroup_apply, Propagator, Semigroup};
pub use registry::{
    lsi_dim_constant, verify_inequality, verify_with_rerun, CheckInputs, InequalityId, NodeSelection, PairSelection,
    UnknownId,
};
pub use sparse::Csr;
pub use spectral::{components, spectral_gap, SpectralGap};

use crate::symbolic::SymbolicError;

#[derive(Debug, thiserror::Error)]
pub enum HeatError {
    #[error("invalid grid: {0}")]
    GridSpec(String),
    #[error("axis {axis} has {count} nodes, at least 8 are required")]
    TooCoarse { axis: usize, count: usize },
    #[error("jump along field {field} from node {node} leaves the lattice on axis {axis}")]
    LatticeNotClosed { field: usize, node: usize, axis: usize },
    #[error("horizontal field {field} is not constant along its own flow")]
    NonLinearFlow { field: usize },
    #[error("vertical field {field} has non-constant coefficients")]
    UnsupportedVertical { field: usize },
    #[error("generator invariant violated: {0}")]
    Invariant(String),
    #[error("invalid time {0}")]
    NegativeTime(f64),
    #[error("function must be positive, found {value} at node {index}")]
    NonPositive { index: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("{id} needs {what}")]
    MissingSideData { id: String, what: &'static str },
    #[error("{0} needs a probability measure, the grid measure is not normalized")]
    InfiniteMeasure(String),
    #[error("{0} requires rho1 > 0")]
    RequiresPositiveRho1(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
