//! Curvature-dimension parameters `(ρ₁, ρ₂, κ, d)`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("rho2 must be positive and finite, got {0}")]
    Rho2(f64),
    #[error("kappa must be nonnegative and finite, got {0}")]
    Kappa(f64),
    #[error("d must be positive (or infinite), got {0}")]
    Dimension(f64),
    #[error("rho1 must be finite, got {0}")]
    Rho1(f64),
}

/// A validated parameter tuple. `d` may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct CDParams {
    rho1: f64,
    rho2: f64,
    kappa: f64,
    #[serde(with = "dimension_serde")]
    d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    rho1: f64,
    rho2: f64,
    kappa: f64,
    #[serde(with = "dimension_serde")]
    d: f64,
}

impl TryFrom<RawParams> for CDParams {
    type Error = ParamError;
    fn try_from(r: RawParams) -> Result<Self, ParamError> {
        CDParams::new(r.rho1, r.rho2, r.kappa, r.d)
    }
}

mod dimension_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &f64, s: S) -> Result<S::Ok, S::Error> {
        if d.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*d)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid dimension {s:?}"))),
        }
    }
}

impl CDParams {
    pub fn new(rho1: f64, rho2: f64, kappa: f64, d: f64) -> Result<Self, ParamError> {
        if !rho1.is_finite() {
            return Err(ParamError::Rho1(rho1));
        }
        if !(rho2 > 0.0 && rho2.is_finite()) {
            return Err(ParamError::Rho2(rho2));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(ParamError::Kappa(kappa));
        }
        if !(d > 0.0) {
            return Err(ParamError::Dimension(d));
        }
        Ok(CDParams { rho1, rho2, kappa, d })
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }
    pub fn rho2(&self) -> f64 {
        self.rho2
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn with_rho1(&self, rho1: f64) -> Result<Self, ParamError> {
        CDParams::new(rho1, self.rho2, self.kappa, self.d)
    }
    pub fn with_rho2(&self, rho2: f64) -> Result<Self, ParamError> {
        CDParams::new(self.rho1, rho2, self.kappa, self.d)
    }
    pub fn with_kappa(&self, kappa: f64) -> Result<Self, ParamError> {
        CDParams::new(self.rho1, self.rho2, kappa, self.d)
    }
    pub fn with_d(&self, d: f64) -> Result<Self, ParamError> {
        CDParams::new(self.rho1, self.rho2, self.kappa, d)
    }

    /// `ρ₁⁻ = max(−ρ₁, 0)`.
    pub fn rho1_minus(&self) -> f64 {
        (-self.rho1).max(0.0)
    }

    /// `α = −min(ρ₂, ρ₁ − κ, 0)`.
    pub fn alpha(&self) -> f64 {
        -(self.rho2.min(self.rho1 - self.kappa).min(0.0))
    }

    /// `t₀ = min(1/ρ₀, 1/ρ₁⁻)`, with `1/0 = ∞`.
    pub fn t0(&self, rho0: f64) -> f64 {
        let m = self.rho1_minus();
        let second = if m > 0.0 { 1.0 / m } else { f64::INFINITY };
        (1.0 / rho0).min(second)
    }

    /// `1 + 2κ/ρ₂ + 2ρ₁⁻t`, the factor shared by the reverse inequalities.
    pub fn reverse_factor(&self, t: f64) -> f64 {
        1.0 + 2.0 * self.kappa / self.rho2 + 2.0 * self.rho1_minus() * t
    }

    /// `(1 + 2κ/ρ₂ + 2ρ₁⁻t) / (4t)`, the Harnack and transport cost factor.
    pub fn harnack_factor(&self, t: f64) -> f64 {
        self.reverse_factor(t) / (4.0 * t)
    }
}

impl fmt::Display for CDParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d.is_infinite() {
            write!(f, "CD({}, {}, {}, inf)", self.rho1, self.rho2, self.kappa)
        } else {
            write!(f, "CD({}, {}, {}, {})", self.rho1, self.rho2, self.kappa, self.d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_constraints() {
        assert!(CDParams::new(0.0, 0.0, 1.0, 2.0).is_err());
        assert!(CDParams::new(0.0, 1.0, -1.0, 2.0).is_err());
        assert!(CDParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(CDParams::new(f64::NAN, 1.0, 1.0, 2.0).is_err());
        assert!(CDParams::new(-3.0, 1.0, 0.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn derived_constants() {
        let p = CDParams::new(0.0, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(p.alpha(), 1.0);
        assert_eq!(p.rho1_minus(), 0.0);
        assert_eq!(p.t0(1.0), 1.0);
        let q = CDParams::new(2.0, 1.0, 1.0, f64::INFINITY).unwrap();
        assert_eq!(q.alpha(), 0.0);
        let r = CDParams::new(-2.0, 1.0, 0.0, 3.0).unwrap();
        assert_eq!(r.rho1_minus(), 2.0);
        assert_eq!(r.t0(1.0), 0.5);
        assert_eq!(r.reverse_factor(0.25), 2.0);
    }

    #[test]
    fn serde_infinite_dimension() {
        let p = CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap();
        let s = toml::to_string(&p).unwrap();
        assert!(s.contains("\"inf\""));
        let back: CDParams = toml::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
