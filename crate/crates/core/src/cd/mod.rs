//! Curvature-dimension certification on 2-jets.

mod certify;
mod forms;
mod margin;
mod search;

pub use certify::{certify, CdStatus, CdVerdict, Certifier, CertifyConfig, NuGrid, Witness};
pub use forms::{jet_forms, jet_len, jet_of, second_order_slots, JetForms, QuadraticFormBundle};
pub use margin::{cd_margin_at_jet, margin_parts, MarginParts};
pub use search::{rho2_kappa_frontier, search_params, search_rho2_kappa, FreeParam, SearchResult, SearchSpec};

use crate::params::{CDParams, ParamError};
use crate::symbolic::SymbolicError;

#[derive(Debug, thiserror::Error)]
pub enum CdError {
    #[error("the nu grid is empty or not positive")]
    EmptyNuGrid,
    #[error("sampling budget must be positive")]
    Budget,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid search box: {0}")]
    SearchBox(String),
    #[error("no certified point in the search box (endpoint {value} was {status:?})")]
    NoCertifiedPoint { value: f64, status: CdStatus },
}

/// `α = −min(ρ₂, ρ₁ − κ, 0)`.
pub fn alpha_of(params: &CDParams) -> f64 {
    params.alpha()
}

/// `t₀ = min(1/ρ₀, 1/ρ₁⁻)`.
pub fn t0_of(params: &CDParams, rho0: f64) -> f64 {
    params.t0(rho0)
}
