//! Check records shared by the heat, transport and isoperimetry verifiers.

use serde::{Deserialize, Serialize};

use crate::params::CDParams;
use crate::serde_float;

/// Absolute floor of the per-evaluation tolerance.
pub const TOL_FLOOR: f64 = 1e-6;
/// Multiplier of `h²·scale` in the per-evaluation tolerance.
pub const TOL_GRID: f64 = 5.0;

/// `10⁻⁶ + 5h²·max(|lhs|, |rhs|)`.
pub fn tolerance(h: f64, lhs: f64, rhs: f64) -> f64 {
    let scale = if lhs.is_finite() { lhs.abs() } else { 0.0 }.max(if rhs.is_finite() { rhs.abs() } else { 0.0 });
    TOL_FLOOR + TOL_GRID * h * h * scale
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A constant used by a check, with the expression it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub expression: String,
    #[serde(with = "serde_float")]
    pub value: f64,
}

impl Constant {
    pub fn new(name: impl Into<String>, expression: impl Into<String>, value: f64) -> Self {
        Constant { name: name.into(), expression: expression.into(), value }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckWitness {
    pub function: String,
    pub time: Option<f64>,
    pub node: Option<usize>,
    pub point: Vec<f64>,
    pub other_node: Option<usize>,
    pub other_point: Vec<f64>,
    /// Extra index of the evaluation, e.g. `alpha = 2`.
    pub detail: Option<String>,
    #[serde(with = "serde_float")]
    pub lhs: f64,
    #[serde(with = "serde_float")]
    pub rhs: f64,
    #[serde(with = "serde_float")]
    pub margin: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub params: Option<CDParams>,
    pub rho0: Option<f64>,
    pub times: Vec<f64>,
    pub sample: String,
    pub evaluations: usize,
    /// Margin `rhs − lhs` of the evaluation with the least slack `margin + tolerance`.
    #[serde(with = "serde_float")]
    pub min_margin: f64,
    pub tolerance: f64,
    pub worst: Option<CheckWitness>,
    pub verdict: Verdict,
    pub grid_h: Option<f64>,
    pub constants: Vec<Constant>,
    pub notes: Vec<String>,
    pub half_resolution: Option<Box<InequalityReport>>,
}

impl InequalityReport {
    /// Verdict of this grid and of the half-resolution rerun, when present.
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass && self.half_resolution.as_ref().map_or(true, |r| r.passed())
    }

    pub fn with_rerun(mut self, rerun: InequalityReport) -> Self {
        self.half_resolution = Some(Box::new(rerun));
        self
    }
}

/// One evaluated instance, referring to context by index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub function: usize,
    pub time: Option<usize>,
    pub node: Option<usize>,
    pub other: Option<usize>,
    pub aux: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl Evaluation {
    pub fn margin(&self) -> f64 {
        if self.rhs == f64::INFINITY && self.lhs.is_finite() {
            f64::INFINITY
        } else {
            self.rhs - self.lhs
        }
    }

    fn slack(&self) -> f64 {
        let m = self.margin();
        if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            m + self.tol
        }
    }
}

/// Running minimum of slack, order-stable so that merges in a fixed order
/// give the same witness regardless of threading.
#[derive(Clone, Debug, Default)]
pub struct Reducer {
    worst: Option<Evaluation>,
    count: usize,
}

impl Reducer {
    pub fn push(&mut self, e: Evaluation) {
        self.count += 1;
        match &self.worst {
            Some(w) if w.slack() <= e.slack() => {}
            _ => self.worst = Some(e),
        }
    }

    pub fn merge(&mut self, other: Reducer) {
        self.count += other.count;
        if let Some(e) = other.worst {
            match &self.worst {
                Some(w) if w.slack() <= e.slack() => {}
                _ => self.worst = Some(e),
            }
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn worst(&self) -> Option<&Evaluation> {
        self.worst.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(function: usize, lhs: f64, rhs: f64, tol: f64) -> Evaluation {
        Evaluation { function, time: None, node: None, other: None, aux: None, lhs, rhs, tol }
    }

    #[test]
    fn reducer_keeps_first_least_slack() {
        let mut a = Reducer::default();
        a.push(ev(0, 1.0, 2.0, 0.0));
        a.push(ev(1, 1.0, 1.5, 0.0));
        let mut b = Reducer::default();
        b.push(ev(2, 1.0, 1.5, 0.0));
        b.push(ev(3, 0.0, 10.0, 0.0));
        a.merge(b);
        assert_eq!(a.count(), 4);
        assert_eq!(a.worst().unwrap().function, 1);
    }

    #[test]
    fn nan_margins_are_worst() {
        let mut r = Reducer::default();
        r.push(ev(0, 0.0, -1.0, 0.0));
        r.push(ev(1, f64::NAN, 0.0, 0.0));
        assert_eq!(r.worst().unwrap().function, 1);
    }
}
