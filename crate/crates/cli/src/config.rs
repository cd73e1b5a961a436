//! Job configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subgamma::heat::Boundary;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Built-in model name or path to a model file.
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamOverrides,
    pub grid: Option<GridConfig>,
    pub certify: Option<CertifySection>,
    pub heat: Option<HeatSection>,
    pub spectral: Option<SpectralSection>,
    pub transport: Option<TransportSection>,
    pub isoperimetry: Option<IsoperimetrySection>,
}

/// Replacements for the model's claimed parameters. `d` may be `"inf"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub kappa: Option<f64>,
    pub d: Option<Dimension>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dimension {
    Finite(f64),
    Named(InfName),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfName {
    Inf,
}

impl Dimension {
    pub fn value(self) -> f64 {
        match self {
            Dimension::Finite(d) => d,
            Dimension::Named(InfName::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub extents: Vec<[f64; 2]>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    /// Repeat each check at spacing `2h`.
    #[serde(default)]
    pub half_resolution: bool,
}

fn default_boundary() -> Boundary {
    Boundary::ZeroFlux
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub base_points: Option<usize>,
    pub jets_per_point: Option<usize>,
    pub box_half_width: Option<f64>,
    pub search: Option<SearchSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    /// `rho1`, `rho2`, `kappa` or `d`; `rho2-kappa` scans `kappas` and bisects `rho2`.
    pub free: String,
    pub lo: f64,
    pub hi: f64,
    pub resolution: f64,
    #[serde(default)]
    pub kappas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    Ou,
    Heisenberg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSection {
    /// Inequality ids, or `["all"]`.
    pub ids: Vec<String>,
    #[serde(default)]
    pub times: Vec<f64>,
    pub battery: Option<Battery>,
    /// Extra polynomial test functions in the model coordinates.
    #[serde(default)]
    pub functions: Vec<String>,
    /// Central fraction of each axis; all nodes when absent.
    pub interior: Option<f64>,
    /// Random pair sources; every ordered pair of selected nodes when absent.
    pub pair_sources: Option<usize>,
    #[serde(default)]
    pub pairs: Vec<[Vec<f64>; 2]>,
    pub rho0: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub exponents: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    /// Compare against this value instead of the Poincaré bound.
    pub expected_gap: Option<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    0.02
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    /// Densities proportional to `exp(m·x₁)`.
    #[serde(default)]
    pub shifts: Vec<f64>,
    #[serde(default)]
    pub random_densities: usize,
    #[serde(default)]
    pub times: Vec<f64>,
    pub hwi_c: Option<f64>,
    pub hwi_horizon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoperimetrySection {
    #[serde(default)]
    pub sets: Vec<String>,
    #[serde(default)]
    pub random_sets: usize,
    pub rho0: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    4
}

impl JobConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
