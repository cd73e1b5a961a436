//! Horizontal perimeter of node sets and the logarithmic isoperimetric check.

use serde::{Deserialize, Serialize};

use crate::heat::{GridModel, HeatError, Semigroup};
use crate::params::CDParams;
use crate::report::{tolerance, CheckWitness, Constant, InequalityReport, Verdict};
use crate::symbolic::{parse_poly, SymbolicError};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("set measure {measure} exceeds the admissible {limit}")]
    TooLarge { measure: f64, limit: f64 },
    #[error("rho0 must be positive, got {0}")]
    Rho0(f64),
    #[error("invalid set expression {0:?}: expected `<poly> <op> <poly>` with op one of <=, <, >=, >")]
    Expression(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Heat(#[from] HeatError),
}

/// A set of grid nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSet {
    indicator: Vec<bool>,
    measure: f64,
}

impl GridSet {
    fn from_indicator(grid: &GridModel, indicator: Vec<bool>) -> Self {
        let measure = indicator.iter().zip(grid.mu()).filter(|(a, _)| **a).map(|(_, m)| m).sum();
        GridSet { indicator, measure }
    }

    pub fn from_nodes(grid: &GridModel, nodes: &[usize]) -> Self {
        let mut ind = vec![false; grid.nodes()];
        for &i in nodes {
            ind[i] = true;
        }
        Self::from_indicator(grid, ind)
    }

    /// `{f ≤ c}`; nodes on the threshold belong to the set.
    pub fn sublevel(grid: &GridModel, f: impl Fn(&[f64]) -> f64, c: f64) -> Self {
        let ind = (0..grid.nodes()).map(|i| f(grid.point(i)) <= c).collect();
        Self::from_indicator(grid, ind)
    }

    /// A comparison of two polynomials in the coordinates, e.g. `x <= -0.5`.
    pub fn parse<S: AsRef<str>>(grid: &GridModel, expr: &str, names: &[S]) -> Result<Self, GeometryError> {
        let (pos, op) = ["<=", ">=", "<", ">"]
            .iter()
            .find_map(|op| expr.find(op).map(|p| (p, *op)))
            .ok_or_else(|| GeometryError::Expression(expr.into()))?;
        let lhs = parse_poly(&expr[..pos], names)?;
        let rhs = parse_poly(&expr[pos + op.len()..], names)?;
        let diff = |p: &[f64]| lhs.eval_f64(p) - rhs.eval_f64(p);
        let ind = (0..grid.nodes())
            .map(|i| {
                let v = diff(grid.point(i));
                match op {
                    "<=" => v <= 0.0,
                    "<" => v < 0.0,
                    ">=" => v >= 0.0,
                    _ => v > 0.0,
                }
            })
            .collect();
        Ok(Self::from_indicator(grid, ind))
    }

    pub fn complement(&self, grid: &GridModel) -> Self {
        Self::from_indicator(grid, self.indicator.iter().map(|a| !a).collect())
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.indicator.iter().filter(|a| **a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indicator[i]
    }

    pub fn indicator(&self) -> Vec<f64> {
        self.indicator.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerimeterEstimate {
    /// Estimate after the last mollification step.
    pub value: f64,
    /// Estimate after `0, 1, …, steps` steps.
    pub curve: Vec<f64>,
    /// Semigroup time per step.
    pub step: f64,
    /// Last step changed the estimate by at most 1%.
    pub stabilized: bool,
}

/// Semigroup time of one mollification step.
pub fn mollification_step(grid: &GridModel) -> f64 {
    grid.h() * grid.h() / 2.0
}

/// `∫√Γ_h(P_{kΔt} 1_A) dμ` for `k = 0, …, steps`.
pub fn horizontal_perimeter(grid: &GridModel, set: &GridSet, steps: usize) -> Result<PerimeterEstimate, GeometryError> {
    let dt = mollification_step(grid);
    let times: Vec<f64> = (1..=steps).map(|k| k as f64 * dt).collect();
    let ind = set.indicator();
    let mut smoothed = vec![ind.clone()];
    if !set.is_empty() && set.len() < grid.nodes() {
        smoothed.extend(Semigroup::new(grid).apply_times(&ind, &times)?);
    } else {
        smoothed.extend(times.iter().map(|_| ind.clone()));
    }
    let curve: Vec<f64> = smoothed
        .iter()
        .map(|f| grid.gamma(f).iter().zip(grid.mu()).map(|(g, m)| m * g.sqrt()).sum())
        .collect();
    let value = *curve.last().unwrap();
    let stabilized = steps == 0 && value == 0.0
        || curve.len() >= 2 && (value - curve[curve.len() - 2]).abs() <= 1e-2 * value.max(f64::MIN_POSITIVE);
    Ok(PerimeterEstimate { value, curve, step: dt, stabilized })
}

/// `ln2/(4(3 + 2κ/ρ₂))·min(√ρ₀, ρ₀/√ρ₁⁻)`.
pub fn isoperimetric_constant(params: &CDParams, rho0: f64) -> f64 {
    let r1m = params.rho1_minus();
    let second = if r1m > 0.0 { rho0 / r1m.sqrt() } else { f64::INFINITY };
    std::f64::consts::LN_2 / (4.0 * (3.0 + 2.0 * params.kappa() / params.rho2())) * rho0.sqrt().min(second)
}

/// `P(A) ≥ K·μ(A)·√(ln(1/μ(A)))` for `μ(A) ≤ ½`.
pub fn verify_isoperimetry(
    grid: &GridModel,
    set: &GridSet,
    rho0: f64,
    params: &CDParams,
    steps: usize,
    label: &str,
) -> Result<InequalityReport, GeometryError> {
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(GeometryError::Rho0(rho0));
    }
    if !grid.is_probability() {
        return Err(HeatError::InfiniteMeasure(grid.name.clone()).into());
    }
    // A slab of width h around the boundary may land on either side.
    let limit = 0.5 + grid.h();
    let m = set.measure();
    if m > limit {
        return Err(GeometryError::TooLarge { measure: m, limit });
    }
    let perimeter = horizontal_perimeter(grid, set, steps)?;
    let k = isoperimetric_constant(params, rho0);
    let lhs = perimeter.value;
    let rhs = if m > 0.0 { k * m * (1.0 / m).ln().max(0.0).sqrt() } else { 0.0 };
    let h = grid.h();
    let tol = tolerance(h, lhs, rhs);
    let margin = rhs - lhs;
    let mut notes = vec![
        "perimeter is the mollified surrogate: integral of the discrete horizontal gradient norm of the heat-smoothed indicator".into(),
        format!(
            "mollification curve {:?} at step {}; {}",
            perimeter.curve,
            perimeter.step,
            if perimeter.stabilized { "stabilized" } else { "not stabilized" }
        ),
    ];
    if m > 0.5 {
        notes.push(format!("set measure {m} exceeds 1/2 by less than the grid slab h = {h}"));
    }
    Ok(InequalityReport {
        id: "ISOPERIMETRY".into(),
        params: Some(*params),
        rho0: Some(rho0),
        times: Vec::new(),
        sample: format!("set {label} ({} nodes, measure {m}) on {} (h = {h})", set.len(), grid.name),
        evaluations: 1,
        min_margin: -margin,
        tolerance: tol,
        worst: Some(CheckWitness {
            function: label.to_string(),
            time: None,
            node: None,
            point: Vec::new(),
            other_node: None,
            other_point: Vec::new(),
            detail: Some(format!("measure = {m}")),
            // The inequality is a lower bound on the perimeter.
            lhs: rhs,
            rhs: lhs,
            margin: -margin,
            tolerance: tol,
        }),
        verdict: if -margin >= -tol { Verdict::Pass } else { Verdict::Fail },
        grid_h: Some(h),
        constants: vec![
            Constant::new("K", "ln(2)/(4*(3 + 2*kappa/rho2)) * min(sqrt(rho0), rho0/sqrt(rho1_minus))", k),
            Constant::new("perimeter", "int sqrt(Gamma_h(P_eps 1_A)) dmu", lhs),
        ],
        notes,
        half_resolution: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::grid::tests::ou_grid;
    use crate::heat::{discretize, Boundary, GridSpec};
    use crate::models::euclidean;

    fn ou() -> CDParams {
        CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap()
    }

    #[test]
    fn gaussian_half_line() {
        let g = ou_grid(0.05);
        let a = GridSet::parse(&g, "x <= 0", &["x"]).unwrap();
        let p = horizontal_perimeter(&g, &a, 4).unwrap();
        let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((p.value - phi0).abs() < 1e-2, "{:?}", p.curve);
        assert!(p.stabilized);
        let r = verify_isoperimetry(&g, &a, 1.0, &ou(), 4, "x <= 0").unwrap();
        let k = std::f64::consts::LN_2 / 12.0;
        let w = r.worst.unwrap();
        assert!((w.lhs - k * a.measure() * (1.0 / a.measure()).ln().sqrt()).abs() < 1e-12);
        assert!(r.verdict == Verdict::Pass && w.rhs / w.lhs > 10.0);
    }

    #[test]
    fn complement_and_trivial_sets() {
        let g = ou_grid(0.05);
        let a = GridSet::sublevel(&g, |p| p[0].sin() + 0.3 * p[0], -0.2);
        let pa = horizontal_perimeter(&g, &a, 3).unwrap();
        let pc = horizontal_perimeter(&g, &a.complement(&g), 3).unwrap();
        assert!((pa.value - pc.value).abs() < 1e-8);
        let empty = GridSet::from_nodes(&g, &[]);
        assert_eq!(horizontal_perimeter(&g, &empty, 3).unwrap().value, 0.0);
        assert_eq!(horizontal_perimeter(&g, &empty.complement(&g), 3).unwrap().value, 0.0);
        let r = verify_isoperimetry(&g, &empty, 1.0, &ou(), 3, "empty").unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(matches!(
            verify_isoperimetry(&g, &empty.complement(&g), 1.0, &ou(), 3, "all"),
            Err(GeometryError::TooLarge { .. })
        ));
    }

    #[test]
    fn periodic_half_circle_has_two_crossings() {
        let m = euclidean(1).unwrap();
        let spec = GridSpec::for_operator(&m.operator, 0.01, &[(0.0, 1.0)], Boundary::Periodic).unwrap();
        let g = discretize(&m, &spec).unwrap();
        let a = GridSet::parse(&g, "x < 0.5", &["x"]).unwrap();
        let p = horizontal_perimeter(&g, &a, 0).unwrap();
        assert!((p.value - 2.0 / g.total_mass()).abs() < 1e-9, "{}", p.value);
    }

    #[test]
    fn malformed_expressions() {
        let g = ou_grid(0.1);
        assert!(matches!(GridSet::parse(&g, "x + 1", &["x"]), Err(GeometryError::Expression(_))));
        assert!(GridSet::parse(&g, "y <= 0", &["x"]).is_err());
    }
}
