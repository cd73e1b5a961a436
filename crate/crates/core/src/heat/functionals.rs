//! Integral functionals against the grid measure.

use super::grid::GridModel;
use super::HeatError;

/// Floor of the `A_ε` class.
pub const EPSILON: f64 = 1e-8;

pub fn floor_eps(f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| v.max(EPSILON)).collect()
}

fn check_positive(f: &[f64]) -> Result<(), HeatError> {
    match f.iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(HeatError::NonPositive { index, value: f[index] }),
        None => Ok(()),
    }
}

pub fn integrate(mu: &[f64], f: &[f64]) -> f64 {
    f.iter().zip(mu).map(|(a, m)| a * m).sum()
}

/// `∫f ln f dμ − ∫f dμ · ln ∫f dμ`.
pub fn entropy(mu: &[f64], f: &[f64]) -> Result<f64, HeatError> {
    check_positive(f)?;
    let m = integrate(mu, f);
    let flogf: f64 = f.iter().zip(mu).map(|(v, w)| w * v * v.ln()).sum();
    Ok(flogf - m * m.ln())
}

pub fn variance(mu: &[f64], f: &[f64]) -> f64 {
    let mass: f64 = mu.iter().sum();
    let m = integrate(mu, f) / mass;
    f.iter().zip(mu).map(|(v, w)| w * (v - m).powi(2)).sum()
}

/// `‖f‖_p` against `μ`.
pub fn lp_norm(mu: &[f64], f: &[f64], p: f64) -> f64 {
    let s: f64 = f.iter().zip(mu).map(|(v, w)| w * v.abs().powf(p)).sum();
    s.powf(1.0 / p)
}

/// Fisher information `∫Γ(f)/f dμ` with the chain carré du champ.
pub fn fisher(grid: &GridModel, f: &[f64]) -> Result<f64, HeatError> {
    check_positive(f)?;
    let g = grid.chain_gamma(f);
    Ok(g.iter().zip(f).zip(grid.mu()).map(|((gv, fv), m)| m * gv / fv).sum())
}

/// Vertical Fisher information `∫Γ^Z(f)/f dμ`.
pub fn fisher_vertical(grid: &GridModel, f: &[f64]) -> Result<f64, HeatError> {
    check_positive(f)?;
    let g = grid.gamma_z(f);
    Ok(g.iter().zip(f).zip(grid.mu()).map(|((gv, fv), m)| m * gv / fv).sum())
}

/// `∫ e^{λ d²(x0, x)} dμ(x)` with graph distances from `x0`.
pub fn exp_moment(grid: &GridModel, x0: usize, lambda: f64) -> Result<f64, HeatError> {
    let d = crate::metric::graph_distances(grid, x0);
    Ok(d.iter().zip(grid.mu()).map(|(di, m)| m * (lambda * di * di).exp()).sum())
}
