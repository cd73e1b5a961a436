//! Entropy against transport cost: the Wasserstein smoothing bound and the
//! modified HWI inequality.

use serde::{Deserialize, Serialize};

use super::transport::{wasserstein2, TransportResult};
use super::{DistanceMatrix, MetricError};
use crate::heat::{entropy, fisher, fisher_vertical, integrate, GridModel, HeatError, Semigroup};
use crate::params::CDParams;
use crate::report::{tolerance, CheckWitness, Constant, InequalityReport, Verdict};

/// `∫f dμ` must be 1 within this.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Rescale nonnegative `f` to a probability density against the grid measure.
pub fn normalize_density(grid: &GridModel, f: &[f64]) -> Vec<f64> {
    let m = integrate(grid.mu(), f);
    f.iter().map(|v| v / m).collect()
}

fn check_density(grid: &GridModel, f: &[f64], strict: bool) -> Result<(), MetricError> {
    if !grid.is_probability() {
        return Err(HeatError::InfiniteMeasure(grid.name.clone()).into());
    }
    if let Some(index) = f.iter().position(|v| if strict { !(*v > 0.0) } else { !(*v >= 0.0) }) {
        return Err(HeatError::NonPositive { index, value: f[index] }.into());
    }
    let m = integrate(grid.mu(), f);
    if (m - 1.0).abs() > NORMALIZATION_TOL {
        return Err(MetricError::Marginal(format!("density integrates to {m}, expected 1")));
    }
    Ok(())
}

/// `W₂(μ, fμ)` over the grid nodes.
pub fn density_distance(grid: &GridModel, f: &[f64], dist: &DistanceMatrix) -> Result<(f64, TransportResult), MetricError> {
    let nu: Vec<f64> = f.iter().zip(grid.mu()).map(|(a, b)| a * b).collect();
    wasserstein2(dist, grid.mu(), &nu)
}

fn single_report(
    id: &str,
    grid: &GridModel,
    params: &CDParams,
    times: Vec<f64>,
    function: &str,
    evals: &[(Option<f64>, f64, f64)],
    constants: Vec<Constant>,
    notes: Vec<String>,
) -> InequalityReport {
    let h = grid.h();
    let slack = |(_, l, r): &(Option<f64>, f64, f64)| {
        let m = r - l;
        if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            m + tolerance(h, *l, *r)
        }
    };
    let worst = evals.iter().fold(None::<&(Option<f64>, f64, f64)>, |w, e| match w {
        Some(w) if slack(w) <= slack(e) => Some(w),
        _ => Some(e),
    });
    let (min_margin, tol) = worst.map_or((f64::INFINITY, 0.0), |&(_, l, r)| (r - l, tolerance(h, l, r)));
    InequalityReport {
        id: id.to_string(),
        params: Some(*params),
        rho0: None,
        times,
        sample: format!("{function} on {} ({} nodes, h = {h})", grid.name, grid.nodes()),
        evaluations: evals.len(),
        min_margin,
        tolerance: tol,
        worst: worst.map(|&(time, lhs, rhs)| CheckWitness {
            function: function.to_string(),
            time,
            node: None,
            point: Vec::new(),
            other_node: None,
            other_point: Vec::new(),
            detail: None,
            lhs,
            rhs,
            margin: rhs - lhs,
            tolerance: tolerance(h, lhs, rhs),
        }),
        verdict: if min_margin >= -tol { Verdict::Pass } else { Verdict::Fail },
        grid_h: Some(h),
        constants,
        notes,
        half_resolution: None,
    }
}

fn distance_notes(grid: &GridModel) -> Vec<String> {
    if grid.has_vertical() {
        vec!["graph distance over flow-lattice paths bounds the sub-Riemannian distance from above".into()]
    } else {
        Vec::new()
    }
}

/// `Ent_μ(P_t f) ≤ ((1 + 2κ/ρ₂ + 2ρ₁⁻t)/(4t))·W₂(μ, fμ)²` at each time.
pub fn verify_entropy_wasserstein(
    grid: &GridModel,
    f: &[f64],
    times: &[f64],
    params: &CDParams,
    dist: &DistanceMatrix,
    label: &str,
) -> Result<InequalityReport, MetricError> {
    check_density(grid, f, false)?;
    if let Some(&t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(HeatError::NegativeTime(t).into());
    }
    let (w2, plan) = density_distance(grid, f, dist)?;
    let pt = Semigroup::new(grid).apply_times(f, times)?;
    let mut evals = Vec::new();
    let mut constants = vec![Constant::new("W2", "sqrt(min sum d^2 Pi)", w2)];
    for (u, &t) in pt.iter().zip(times) {
        let u: Vec<f64> = u.iter().map(|v| v.max(f64::MIN_POSITIVE)).collect();
        let c = params.harnack_factor(t);
        evals.push((Some(t), entropy(grid.mu(), &u)?, c * w2 * w2));
        constants.push(Constant::new(format!("c(t={t})"), "(1 + 2*kappa/rho2 + 2*rho1_minus*t)/(4*t)", c));
    }
    let mut notes = distance_notes(grid);
    notes.push(format!("transport by {:?}, relative duality gap {:.2e}", plan.method, plan.duality_gap));
    Ok(single_report("ENTROPY_WASSERSTEIN", grid, params, times.to_vec(), label, &evals, constants, notes))
}

/// `∫₀ᵀ e^{2αs} ds`.
pub fn growth_integral(alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        t
    } else {
        (2.0 * alpha * t).exp_m1() / (2.0 * alpha)
    }
}

/// Smallest horizon for which `c·R(T)/(4T) < 1`.
pub fn hwi_min_horizon(params: &CDParams, c: f64) -> f64 {
    let denom = 1.0 - c * params.rho1_minus() / 2.0;
    c * (1.0 + 2.0 * params.kappa() / params.rho2()) / (4.0 * denom)
}

/// `C₁ = C₂ = (∫₀ᵀ e^{2αs} ds) / (1 − c·(1 + 2κ/ρ₂ + 2ρ₁⁻T)/(4T))`, infinite when
/// the denominator is not positive.
pub fn hwi_constant(params: &CDParams, c: f64, horizon: f64) -> f64 {
    let q = 1.0 - c * params.harnack_factor(horizon);
    if q <= 0.0 {
        f64::INFINITY
    } else {
        growth_integral(params.alpha(), horizon) / q
    }
}

/// Horizon minimizing [`hwi_constant`], by a log-spaced scan refined with golden sections.
pub fn hwi_default_horizon(params: &CDParams, c: f64) -> f64 {
    let lo = hwi_min_horizon(params, c).max(1e-9);
    let k = |t: f64| hwi_constant(params, c, t);
    let grid: Vec<f64> = (1..=400).map(|i| lo * (1.0 + 1e-3 * 1.05f64.powi(i))).collect();
    let best = (0..grid.len()).min_by(|&a, &b| k(grid[a]).total_cmp(&k(grid[b]))).unwrap();
    let (mut a, mut b) = (grid[best.saturating_sub(1)].ln(), grid[(best + 1).min(grid.len() - 1)].ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if k(x1.exp()) <= k(x2.exp()) {
            b = x2;
        } else {
            a = x1;
        }
    }
    ((a + b) / 2.0).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HwiReport {
    /// `W₂(μ, fμ)² ≤ c·Ent_μ(f)`.
    pub hypothesis: InequalityReport,
    /// `Ent_μ(f) ≤ C₁∫Γ(f)/f dμ + C₂∫Γ^Z(f)/f dμ`.
    pub conclusion: InequalityReport,
    pub horizon: f64,
    pub constant: f64,
}

impl HwiReport {
    pub fn passed(&self) -> bool {
        self.hypothesis.passed() && self.conclusion.passed()
    }
}

/// Check the transport hypothesis for `f` and the modified HWI conclusion with
/// the constant at `horizon` (default: the minimizer).
pub fn verify_modified_hwi(
    grid: &GridModel,
    f: &[f64],
    c: f64,
    horizon: Option<f64>,
    params: &CDParams,
    dist: &DistanceMatrix,
    label: &str,
) -> Result<HwiReport, MetricError> {
    let r1m = params.rho1_minus();
    if !(c > 0.0 && c.is_finite()) || (r1m > 0.0 && c >= 2.0 / r1m) {
        return Err(MetricError::InvalidConstant(format!("c = {c} must lie in (0, 2/rho1_minus)")));
    }
    let horizon = horizon.unwrap_or_else(|| hwi_default_horizon(params, c));
    let constant = hwi_constant(params, c, horizon);
    if !(horizon > 0.0) || !constant.is_finite() {
        return Err(MetricError::InvalidConstant(format!(
            "horizon T = {horizon} must exceed {} so that c*R(T)/(4T) < 1",
            hwi_min_horizon(params, c)
        )));
    }
    check_density(grid, f, true)?;
    let (w2, plan) = density_distance(grid, f, dist)?;
    let ent = entropy(grid.mu(), f)?;
    let (i_h, i_z) = (fisher(grid, f)?, fisher_vertical(grid, f)?);
    let mut notes = distance_notes(grid);
    notes.push(format!("transport by {:?}, relative duality gap {:.2e}", plan.method, plan.duality_gap));
    let hypothesis = single_report(
        "HWI_HYPOTHESIS",
        grid,
        params,
        Vec::new(),
        label,
        &[(None, w2 * w2, c * ent)],
        vec![Constant::new("c", "transport-entropy constant", c), Constant::new("W2", "sqrt(min sum d^2 Pi)", w2)],
        notes,
    );
    let expr = "(int_0^T exp(2*alpha*s) ds) / (1 - c*(1 + 2*kappa/rho2 + 2*rho1_minus*T)/(4*T))";
    let conclusion = single_report(
        "MODIFIED_HWI",
        grid,
        params,
        vec![horizon],
        label,
        &[(Some(horizon), ent, constant * (i_h + i_z))],
        vec![
            Constant::new("T", "horizon", horizon),
            Constant::new("C1", expr, constant),
            Constant::new("C2", expr, constant),
        ],
        vec!["C1 = C2 follow from the proof chain: transport hypothesis substituted into the smoothing bound".into()],
    );
    Ok(HwiReport { hypothesis, conclusion, horizon, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::grid::tests::ou_grid;
    use crate::metric::subriemannian_distance;

    fn ou_setup(h: f64) -> (GridModel, DistanceMatrix, CDParams) {
        let g = ou_grid(h);
        let all: Vec<usize> = (0..g.nodes()).collect();
        let d = subriemannian_distance(&g, &all).unwrap();
        (g, d, CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap())
    }

    #[test]
    fn ou_constant_minimum() {
        let p = CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap();
        // 2T²/(2T − 1) is minimal at T = 1 with value 2.
        let t = hwi_default_horizon(&p, 2.0);
        assert!((t - 1.0).abs() < 1e-6, "{t}");
        assert!((hwi_constant(&p, 2.0, t) - 2.0).abs() < 1e-10);
        assert!(hwi_constant(&p, 2.0, 0.5).is_infinite());
    }

    #[test]
    fn constant_density_is_tight() {
        let (g, d, p) = ou_setup(0.1);
        let one = vec![1.0 / g.total_mass(); g.nodes()];
        let one = normalize_density(&g, &one);
        let r = verify_entropy_wasserstein(&g, &one, &[0.5, 1.0], &p, &d, "1").unwrap();
        assert!(r.min_margin.abs() < 1e-9 && r.passed());
        let hwi = verify_modified_hwi(&g, &one, 2.0, None, &p, &d, "1").unwrap();
        assert!(hwi.passed());
    }

    #[test]
    fn shift_density_oracles() {
        let (g, d, p) = ou_setup(0.05);
        let m = 0.5;
        let f = normalize_density(&g, &g.sample(|x| (m * x[0] - m * m / 2.0).exp()));
        let r = verify_entropy_wasserstein(&g, &f, &[1.0], &p, &d, "shift").unwrap();
        let w = r.worst.as_ref().unwrap();
        // Mehler: P_1 f is the shift by m/e, entropy m²e⁻²/2.
        let oracle = m * m * (-2.0f64).exp() / 2.0;
        assert!((w.lhs - oracle).abs() < 2e-3 * oracle + 1e-5, "{} vs {oracle}", w.lhs);
        assert!((w.rhs - m * m / 4.0).abs() < 0.05 * m * m, "{}", w.rhs);
        assert!(r.passed());

        let hwi = verify_modified_hwi(&g, &f, 2.0, None, &p, &d, "shift").unwrap();
        let hyp = hwi.hypothesis.worst.as_ref().unwrap();
        assert!((hyp.lhs - hyp.rhs).abs() < 0.05 * m * m, "{} vs {}", hyp.lhs, hyp.rhs);
        assert!(hwi.conclusion.passed());
    }

    #[test]
    fn invalid_inputs() {
        let (g, d, _) = ou_setup(0.1);
        let p = CDParams::new(-1.0, 1.0, 0.0, f64::INFINITY).unwrap();
        let one = normalize_density(&g, &vec![1.0; g.nodes()]);
        assert!(matches!(verify_modified_hwi(&g, &one, 2.0, None, &p, &d, "1"), Err(MetricError::InvalidConstant(_))));
        let q = CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap();
        let twice: Vec<f64> = one.iter().map(|v| 2.0 * v).collect();
        assert!(matches!(verify_entropy_wasserstein(&g, &twice, &[1.0], &q, &d, "2"), Err(MetricError::Marginal(_))));
        assert!(verify_modified_hwi(&g, &one, 2.0, Some(0.4), &q, &d, "1").is_err());
    }
}
