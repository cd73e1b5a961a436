//! TOML model-definition files.
//!
//! ```toml
//! name = "heisenberg-1"
//! coordinates = ["x", "y", "z"]
//! horizontal = [["1", "0", "-1/2*y"], ["0", "1", "1/2*x"]]
//! vertical = [["0", "0", "1"]]
//! potential = "0"
//! compact = false
//! finite_measure = false
//! notes = []
//!
//! [claimed]
//! rho1 = "0"
//! rho2 = "1/2"
//! kappa = "1"
//! d = "2"
//! ```

use serde::{Deserialize, Serialize};

use super::{ClaimedParams, ModelDescriptor, ModelError, ParamSpec};
use crate::symbolic::{parse_poly, DiffusionOperator, Poly, VectorField};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub coordinates: Vec<String>,
    pub horizontal: Vec<Vec<String>>,
    #[serde(default)]
    pub vertical: Vec<Vec<String>>,
    #[serde(default = "zero_string")]
    pub potential: String,
    #[serde(default)]
    pub compact: bool,
    #[serde(default)]
    pub finite_measure: bool,
    #[serde(default)]
    pub notes: Vec<String>,
    pub claimed: ClaimedFile,
}

fn zero_string() -> String {
    "0".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimedFile {
    pub rho1: String,
    pub rho2: String,
    pub kappa: String,
    pub d: String,
}

impl ModelFile {
    pub fn from_toml(src: &str) -> Result<Self, ModelError> {
        toml::from_str(src).map_err(|e| ModelError::Format(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model file serialization cannot fail")
    }

    pub fn from_descriptor(m: &ModelDescriptor) -> Self {
        let names = m.operator.names();
        let field = |x: &VectorField| x.coefficients().iter().map(|c| c.display(names).to_string()).collect();
        ModelFile {
            name: m.name.clone(),
            coordinates: names.to_vec(),
            horizontal: m.operator.horizontal().iter().map(field).collect(),
            vertical: m.operator.vertical().iter().map(field).collect(),
            potential: m.operator.potential().display(names).to_string(),
            compact: m.compact,
            finite_measure: m.finite_measure,
            notes: m.notes.clone(),
            claimed: ClaimedFile {
                rho1: m.claimed.rho1.to_string(),
                rho2: m.claimed.rho2.to_string(),
                kappa: m.claimed.kappa.to_string(),
                d: m.claimed.d.to_string(),
            },
        }
    }

    pub fn to_descriptor(&self) -> Result<ModelDescriptor, ModelError> {
        let names = &self.coordinates;
        let field = |coeffs: &Vec<String>| -> Result<VectorField, ModelError> {
            if coeffs.len() != names.len() {
                return Err(ModelError::Format(format!(
                    "vector field has {} coefficients for {} coordinates",
                    coeffs.len(),
                    names.len()
                )));
            }
            let polys = coeffs.iter().map(|s| parse_poly(s, names)).collect::<Result<Vec<Poly>, _>>()?;
            Ok(VectorField::new(polys)?)
        };
        let horizontal = self.horizontal.iter().map(field).collect::<Result<Vec<_>, _>>()?;
        let vertical = self.vertical.iter().map(field).collect::<Result<Vec<_>, _>>()?;
        let potential = parse_poly(&self.potential, names)?;
        let op = DiffusionOperator::new(names.clone(), horizontal, vertical, Some(potential))?;
        let claimed = ClaimedParams {
            rho1: ParamSpec::parse("rho1", &self.claimed.rho1)?,
            rho2: ParamSpec::parse("rho2", &self.claimed.rho2)?,
            kappa: ParamSpec::parse("kappa", &self.claimed.kappa)?,
            d: ParamSpec::parse("d", &self.claimed.d)?,
        };
        ModelDescriptor::new(self.name.clone(), op, claimed, self.compact, self.finite_measure, self.notes.clone())
    }
}
