//! Sub-Riemannian graph distance and quadratic optimal transport.

mod distance;
mod entropy;
mod transport;

pub use distance::{cached_distance, component_distance, graph_distances, grid_hash, sidecar_path, subriemannian_distance, DistanceMatrix};
pub use entropy::{
    density_distance, growth_integral, hwi_constant, hwi_default_horizon, hwi_min_horizon, normalize_density,
    verify_entropy_wasserstein, verify_modified_hwi, HwiReport, NORMALIZATION_TOL,
};
pub use transport::{
    inf_convolution, sinkhorn, transport_simplex, wasserstein2, wasserstein2_with, CouplingPlan, TransportMethod,
    TransportResult, EXACT_LIMIT,
};

use crate::heat::HeatError;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("node {to} is unreachable from node {from}")]
    Disconnected { from: usize, to: usize },
    #[error("no distance stored between nodes {from} and {to}")]
    MissingDistance { from: usize, to: usize },
    #[error("marginal mismatch: {0}")]
    Marginal(String),
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
