//! Heat semigroup `P_t = e^{tG}` on a grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridModel;
use super::linalg::{cg, dot_mu};
use super::sparse::Csr;
use super::HeatError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagator {
    /// Poisson series `Σ_k Pois(k; Λt)(I + G/Λ)^k`, exact in time up to the truncated tail.
    #[default]
    Uniformization,
    /// Crank–Nicolson with `Δt = min(h², t/64)`.
    CrankNicolson,
}

/// Poisson tail mass left out of the series.
const TAIL: f64 = 1e-16;

pub struct Semigroup<'a> {
    g: &'a Csr,
    mu: &'a [f64],
    h: f64,
    rate: f64,
    method: Propagator,
}

impl<'a> Semigroup<'a> {
    pub fn new(grid: &'a GridModel) -> Self {
        Self::from_parts(grid.generator(), grid.mu(), grid.h())
    }

    /// Semigroup of a generator that is self-adjoint for `mu`. `h` only sets
    /// the Crank–Nicolson step.
    pub fn from_parts(g: &'a Csr, mu: &'a [f64], h: f64) -> Self {
        let rate = g.diagonal().iter().fold(0.0f64, |m, d| m.max(-d));
        Semigroup { g, mu, h, rate, method: Propagator::default() }
    }

    pub fn with_method(mut self, method: Propagator) -> Self {
        self.method = method;
        self
    }

    pub fn apply(&self, f: &[f64], t: f64) -> Result<Vec<f64>, HeatError> {
        let mut out = self.apply_times(f, &[t])?;
        Ok(out.pop().unwrap())
    }

    /// `P_t f` for every `t` in `times`, sharing one pass over the series.
    pub fn apply_times(&self, f: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>, HeatError> {
        if let Some(&t) = times.iter().find(|t| !(**t >= 0.0)) {
            return Err(HeatError::NegativeTime(t));
        }
        match self.method {
            Propagator::Uniformization => Ok(self.uniformization(f, times)),
            Propagator::CrankNicolson => times.iter().map(|&t| self.crank_nicolson(f, t)).collect(),
        }
    }

    /// `[function][time]` table of `P_t f`, computed in parallel over functions.
    pub fn apply_many(&self, fs: &[Vec<f64>], times: &[f64]) -> Result<Vec<Vec<Vec<f64>>>, HeatError> {
        fs.par_iter().map(|f| self.apply_times(f, times)).collect()
    }

    fn uniformization(&self, f: &[f64], times: &[f64]) -> Vec<Vec<f64>> {
        let n = f.len();
        let mut out = vec![vec![0.0; n]; times.len()];
        if self.rate == 0.0 {
            return times.iter().map(|_| f.to_vec()).collect();
        }
        let lt: Vec<f64> = times.iter().map(|t| self.rate * t).collect();
        let mut logw: Vec<f64> = lt.iter().map(|l| -l).collect();
        let mut done: Vec<bool> = lt.iter().map(|l| *l == 0.0).collect();
        for (o, l) in out.iter_mut().zip(&lt) {
            if *l == 0.0 {
                o.copy_from_slice(f);
            }
        }
        let mut u = f.to_vec();
        let mut gu = vec![0.0; n];
        let mut k = 0usize;
        while done.iter().any(|d| !d) {
            for (ti, o) in out.iter_mut().enumerate() {
                if done[ti] {
                    continue;
                }
                let w = logw[ti].exp();
                if w > 0.0 {
                    o.iter_mut().zip(&u).for_each(|(a, b)| *a += w * b);
                }
                let kk = (k + 1) as f64;
                if kk > lt[ti] {
                    let ratio = lt[ti] / kk;
                    if w * ratio / (1.0 - ratio) < TAIL {
                        done[ti] = true;
                    }
                }
                logw[ti] += lt[ti].ln() - kk.ln();
            }
            self.g.mul_into(&u, &mut gu);
            u.iter_mut().zip(&gu).for_each(|(a, b)| *a += b / self.rate);
            k += 1;
        }
        out
    }

    fn crank_nicolson(&self, f: &[f64], t: f64) -> Result<Vec<f64>, HeatError> {
        if t == 0.0 {
            return Ok(f.to_vec());
        }
        let steps = (t / (self.h * self.h).min(t / 64.0)).ceil() as usize;
        let dt = t / steps as f64;
        let n = f.len();
        let mut u = f.to_vec();
        let mut gu = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for _ in 0..steps {
            self.g.mul_into(&u, &mut gu);
            for i in 0..n {
                rhs[i] = u[i] + 0.5 * dt * gu[i];
            }
            let apply = |x: &[f64], y: &mut [f64]| {
                self.g.mul_into(x, y);
                for i in 0..n {
                    y[i] = x[i] - 0.5 * dt * y[i];
                }
            };
            let (next, _) = cg(apply, &rhs, Some(&u), self.mu, 1e-13, 10 * n + 100)?;
            u = next;
        }
        Ok(u)
    }

    /// `p(x, ·, t) = P_t(δ_x/μ_x)`, the kernel density against `μ`.
    pub fn kernel(&self, x: usize, t: f64) -> Result<Vec<f64>, HeatError> {
        let mut delta = vec![0.0; self.mu.len()];
        delta[x] = 1.0 / self.mu[x];
        self.apply(&delta, t)
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        dot_mu(f, g, self.mu)
    }
}

pub fn semigroup_apply(grid: &GridModel, f: &[f64], t: f64) -> Result<Vec<f64>, HeatError> {
    Semigroup::new(grid).apply(f, t)
}

pub fn heat_kernel(grid: &GridModel, x: usize, t: f64) -> Result<Vec<f64>, HeatError> {
    Semigroup::new(grid).kernel(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::grid::tests::ou_grid;

    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constants_are_preserved() {
        let g = ou_grid(0.05);
        let one = vec![1.0; g.nodes()];
        for t in [0.0, 0.3, 2.0] {
            assert!(sup(&semigroup_apply(&g, &one, t).unwrap(), &one) < 1e-10);
        }
        assert!(matches!(semigroup_apply(&g, &one, -1.0), Err(HeatError::NegativeTime(_))));
    }

    #[test]
    fn crank_nicolson_agrees_with_series() {
        let g = ou_grid(0.1);
        let f = g.sample(|p: &[f64]| (1.3 * p[0]).sin() + 0.2 * p[0]);
        let s = Semigroup::new(&g);
        let cn = Semigroup::new(&g).with_method(Propagator::CrankNicolson);
        for t in [0.05, 0.5] {
            let a = s.apply(&f, t).unwrap();
            let b = cn.apply(&f, t).unwrap();
            assert!(sup(&a, &b) < 2e-4, "t = {t}: {}", sup(&a, &b));
        }
    }

    #[test]
    fn semigroup_and_symmetry() {
        let g = ou_grid(0.05);
        let s = Semigroup::new(&g);
        let f = g.sample(|p: &[f64]| (-p[0] * p[0]).exp() + 0.1 * p[0]);
        let h = g.sample(|p: &[f64]| (2.0 * p[0]).cos());
        let a = s.apply(&s.apply(&f, 0.1).unwrap(), 0.2).unwrap();
        let b = s.apply(&f, 0.3).unwrap();
        assert!(sup(&a, &b) < 1e-8);
        let l = s.inner(&h, &s.apply(&f, 0.2).unwrap());
        let r = s.inner(&f, &s.apply(&h, 0.2).unwrap());
        assert!((l - r).abs() <= 1e-9 * l.abs().max(r.abs()));
    }

    #[test]
    fn kernel_is_symmetric() {
        let g = ou_grid(0.05);
        let s = Semigroup::new(&g);
        let (x, y) = (g.nearest(&[-1.0]), g.nearest(&[0.5]));
        let px = s.kernel(x, 0.4).unwrap();
        let py = s.kernel(y, 0.4).unwrap();
        assert!((px[y] - py[x]).abs() <= 1e-8 * px[y]);
    }
}
