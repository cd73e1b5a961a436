//! Spectral gap of `−G` in `L²(μ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{cg, dot_mu};
use super::sparse::Csr;
use super::HeatError;

const MAX_OUTER: usize = 300;
const RESIDUAL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub gap: f64,
    /// `‖−Gv − λv‖_μ / (λ‖v‖_μ)` at the returned eigenvector.
    pub residual: f64,
    pub iterations: usize,
    pub components: usize,
    pub warnings: Vec<String>,
}

/// Connected-component label of each node of the jump graph.
pub fn components(g: &Csr) -> Vec<usize> {
    let n = g.dim();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        stack.push(s);
        while let Some(i) = stack.pop() {
            for (j, v) in g.row(i) {
                if j != i && v != 0.0 && label[j] == usize::MAX {
                    label[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    label
}

/// Smallest nonzero eigenvalue of `−G`, by inverse iteration on the
/// `μ`-orthogonal complement of constants.
pub fn spectral_gap(g: &Csr, mu: &[f64]) -> Result<SpectralGap, HeatError> {
    let labels = components(g);
    let count = labels.iter().max().map_or(0, |m| m + 1);
    if count > 1 {
        return Ok(SpectralGap {
            gap: 0.0,
            residual: 0.0,
            iterations: 0,
            components: count,
            warnings: vec![format!("generator is reducible: {count} disconnected components, gap is 0")],
        });
    }
    let n = g.dim();
    let mass: f64 = mu.iter().sum();
    let deflate = |v: &mut [f64]| {
        let m = dot_mu(v, &vec![1.0; v.len()], mu) / mass;
        v.iter_mut().for_each(|x| *x -= m);
    };
    let normalize = |v: &mut [f64]| {
        let s = dot_mu(v, v, mu).sqrt();
        v.iter_mut().for_each(|x| *x /= s);
    };
    let neg_g = |x: &[f64], y: &mut [f64]| {
        g.mul_into(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x9a9);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut v);
    normalize(&mut v);
    let mut av = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_OUTER {
        let (mut y, _) = cg(neg_g, &v, None, mu, 1e-13, 20 * n + 200)?;
        deflate(&mut y);
        normalize(&mut y);
        v = y;
        neg_g(&v, &mut av);
        let lambda = dot_mu(&v, &av, mu);
        let r: Vec<f64> = av.iter().zip(&v).map(|(a, b)| a - lambda * b).collect();
        residual = dot_mu(&r, &r, mu).sqrt() / lambda.abs();
        if residual <= RESIDUAL {
            return Ok(SpectralGap { gap: lambda, residual, iterations: it, components: 1, warnings: vec![] });
        }
    }
    Err(HeatError::NoConvergence { iterations: MAX_OUTER, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::grid::{discretize, tests::ou_grid, Boundary, GridSpec};
    use crate::models::euclidean;
    use std::f64::consts::PI;

    #[test]
    fn ou_gap_near_one() {
        let g = ou_grid(0.05);
        let s = spectral_gap(g.generator(), g.mu()).unwrap();
        assert!((0.98..=1.02).contains(&s.gap), "{}", s.gap);
        assert!(s.residual <= 1e-8);
    }

    #[test]
    fn periodic_gap_matches_circulant_eigenvalue() {
        let m = euclidean(1).unwrap();
        let h = 1.0 / 64.0;
        let spec = GridSpec::for_operator(&m.operator, h, &[(0.0, 1.0)], Boundary::Periodic).unwrap();
        let g = discretize(&m, &spec).unwrap();
        let s = spectral_gap(g.generator(), g.mu()).unwrap();
        let exact = 2.0 * (1.0 - (2.0 * PI * h).cos()) / (h * h);
        assert!((s.gap - exact).abs() < 1e-6 * exact);
        assert!((s.gap / (4.0 * PI * PI) - 1.0).abs() < 0.02);
    }

    #[test]
    fn disconnected_chain_has_zero_gap() {
        let g = Csr::from_rows(vec![
            vec![(0, -1.0), (1, 1.0)],
            vec![(0, 1.0), (1, -1.0)],
            vec![(2, -2.0), (3, 2.0)],
            vec![(2, 2.0), (3, -2.0)],
        ]);
        let s = spectral_gap(&g, &[0.25; 4]).unwrap();
        assert_eq!(s.gap, 0.0);
        assert_eq!(s.components, 2);
        assert!(!s.warnings.is_empty());
    }
}
