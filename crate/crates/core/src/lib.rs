//! Γ-calculus engine and numerical verification harness for subelliptic
//! diffusion operators.

pub mod models;
pub mod params;
pub mod symbolic;

pub use params::{CDParams, ParamError};
pub mod cd;
mod serde_float;
pub mod heat;
pub mod metric;
pub mod report;
pub mod geometry;
