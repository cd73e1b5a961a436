//! Model spaces: a diffusion operator plus its claimed curvature parameters.

mod builtin;
mod file;

use std::fmt;
use std::path::Path;

pub use builtin::{carnot_step2, euclidean, grushin, heisenberg, ornstein_uhlenbeck, StructureConstants};
pub use file::ModelFile;

use crate::params::{CDParams, ParamError};
use crate::symbolic::{parse_rational, rat_to_f64, DiffusionOperator, Rational, SymbolicError};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model size: {0}")]
    Size(String),
    #[error("inconsistent structure constants: {0}")]
    StructureConstants(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid parameter {field}: {value:?}")]
    ParamSpec { field: &'static str, value: String },
    #[error("model file: {0}")]
    Format(String),
    #[error("unknown model {0:?}")]
    Unknown(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One claimed curvature constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamSpec {
    Exact(Rational),
    /// Only meaningful for the dimension.
    Infinite,
    /// Left open by the source; to be found by search.
    Search,
    /// Any value works (the term it multiplies vanishes identically).
    Free,
}

impl ParamSpec {
    pub fn parse(field: &'static str, s: &str) -> Result<Self, ModelError> {
        match s.trim() {
            "inf" => Ok(ParamSpec::Infinite),
            "search" => Ok(ParamSpec::Search),
            "free" => Ok(ParamSpec::Free),
            other => parse_rational(other)
                .map(ParamSpec::Exact)
                .map_err(|_| ModelError::ParamSpec { field, value: s.to_string() }),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ParamSpec::Exact(r) => Some(rat_to_f64(r)),
            ParamSpec::Infinite => Some(f64::INFINITY),
            ParamSpec::Search | ParamSpec::Free => None,
        }
    }
}

impl fmt::Display for ParamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSpec::Exact(r) => write!(f, "{r}"),
            ParamSpec::Infinite => f.write_str("inf"),
            ParamSpec::Search => f.write_str("search"),
            ParamSpec::Free => f.write_str("free"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimedParams {
    pub rho1: ParamSpec,
    pub rho2: ParamSpec,
    pub kappa: ParamSpec,
    pub d: ParamSpec,
}

impl ClaimedParams {
    /// Resolve to concrete parameters. `Free` entries take `free_value`;
    /// returns `None` if any entry is still `Search`.
    pub fn resolve(&self, free_value: f64) -> Result<Option<CDParams>, ParamError> {
        let get = |p: &ParamSpec| match p {
            ParamSpec::Free => Some(free_value),
            other => other.value(),
        };
        match (get(&self.rho1), get(&self.rho2), get(&self.kappa), get(&self.d)) {
            (Some(a), Some(b), Some(c), Some(d)) => CDParams::new(a, b, c, d).map(Some),
            _ => Ok(None),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let check = |field: &'static str, p: &ParamSpec, ok: &dyn Fn(f64) -> bool| match p {
            ParamSpec::Exact(r) if !ok(rat_to_f64(r)) => {
                Err(ModelError::ParamSpec { field, value: r.to_string() })
            }
            ParamSpec::Infinite if field != "d" => Err(ModelError::ParamSpec { field, value: "inf".into() }),
            _ => Ok(()),
        };
        check("rho1", &self.rho1, &|_| true)?;
        check("rho2", &self.rho2, &|x| x > 0.0)?;
        check("kappa", &self.kappa, &|x| x >= 0.0)?;
        check("d", &self.d, &|x| x > 0.0)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDescriptor {
    pub name: String,
    pub operator: DiffusionOperator,
    pub claimed: ClaimedParams,
    pub compact: bool,
    pub finite_measure: bool,
    pub notes: Vec<String>,
}

impl ModelDescriptor {
    pub fn new(
        name: impl Into<String>,
        operator: DiffusionOperator,
        claimed: ClaimedParams,
        compact: bool,
        finite_measure: bool,
        notes: Vec<String>,
    ) -> Result<Self, ModelError> {
        claimed.validate()?;
        Ok(ModelDescriptor { name: name.into(), operator, claimed, compact, finite_measure, notes })
    }

    pub fn to_toml(&self) -> String {
        ModelFile::from_descriptor(self).to_toml()
    }

    pub fn from_toml(src: &str) -> Result<Self, ModelError> {
        ModelFile::from_toml(src)?.to_descriptor()
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let src = std::fs::read_to_string(path)
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&src)
    }
}

/// Names accepted by [`builtin_by_name`].
pub const BUILTIN_NAMES: &[&str] = &[
    "heisenberg-1",
    "heisenberg-2",
    "grushin-1",
    "ornstein-uhlenbeck-1",
    "euclidean-1",
];

/// Built-in models by family and size, e.g. `heisenberg-2` or `grushin-1`.
pub fn builtin_by_name(name: &str) -> Result<ModelDescriptor, ModelError> {
    let (family, size) = name.rsplit_once('-').ok_or_else(|| ModelError::Unknown(name.to_string()))?;
    let n: usize = size.parse().map_err(|_| ModelError::Unknown(name.to_string()))?;
    match family {
        "heisenberg" => heisenberg(n),
        "grushin" => grushin(n),
        "ornstein-uhlenbeck" => ornstein_uhlenbeck(n),
        "euclidean" => euclidean(n),
        _ => Err(ModelError::Unknown(name.to_string())),
    }
}

/// A built-in name or a path to a model file.
pub fn resolve_model(reference: &str) -> Result<ModelDescriptor, ModelError> {
    let path = Path::new(reference);
    if path.extension().is_some_and(|e| e == "toml") || path.exists() {
        return ModelDescriptor::load(path);
    }
    builtin_by_name(reference)
}
