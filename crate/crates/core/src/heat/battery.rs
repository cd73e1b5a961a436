//! Test functions for the inequality registry.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::GridModel;

type Func = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A named function of the coordinates, sampled onto any grid.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    f: Arc<Func>,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.f)(p)
    }

    pub fn sample(&self, grid: &GridModel) -> Vec<f64> {
        grid.sample(|p| self.eval(p))
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.name)
    }
}

/// Twenty positive functions of the first coordinate.
pub fn ou_battery(seed: u64) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for a in [-1.0, -0.5, 0.5, 1.0] {
        out.push(TestFunction::new(format!("exp({a}*x)"), move |p| (a * p[0]).exp()));
    }
    for (b, c) in [(0.5, 0.3), (1.0, 1.1), (2.0, -0.4), (3.0, 0.7)] {
        out.push(TestFunction::new(format!("1+0.5*sin({b}*x+{c})"), move |p| 1.0 + 0.5 * (b * p[0] + c).sin()));
    }
    for (s, x0) in [(1.0, 0.0), (2.0, 0.5), (4.0, -0.5), (8.0, 1.0)] {
        out.push(TestFunction::new(format!("1+0.8*tanh({s}*(x-{x0}))"), move |p| {
            1.0 + 0.8 * (s * (p[0] - x0)).tanh()
        }));
    }
    for (c, w) in [(0.0, 0.5), (1.0, 0.3), (-1.5, 0.7), (0.5, 1.5)] {
        out.push(TestFunction::new(format!("0.01+exp(-(x-{c})^2/(2*{w}^2))"), move |p| {
            0.01 + (-(p[0] - c).powi(2) / (2.0 * w * w)).exp()
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in 0..4 {
        let terms: Vec<(f64, f64, f64)> =
            (1..=4).map(|k| (rng.gen_range(-0.4..0.4), k as f64 * rng.gen_range(0.3..1.2), rng.gen_range(0.0..6.3))).collect();
        out.push(TestFunction::new(format!("cosine-mixture-{m}"), move |p| {
            2.0 + terms.iter().map(|(a, w, phi)| a * (w * p[0] + phi).cos()).sum::<f64>()
        }));
    }
    out
}

/// Twenty positive functions of `(x, y, z)` varying on the scale of the
/// interior of `[−2, 2]² × [−1, 1]`.
pub fn heisenberg_battery(seed: u64) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for (cx, cy, cz, w, wz) in
        [(0.0, 0.0, 0.0, 0.6, 0.3), (0.5, -0.3, 0.1, 0.8, 0.4), (-0.4, 0.4, -0.2, 0.7, 0.25), (0.0, 0.5, 0.2, 1.0, 0.5)]
    {
        out.push(TestFunction::new(format!("1+bump({cx},{cy},{cz};{w},{wz})"), move |p| {
            let r2 = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)) / (2.0 * w * w);
            1.0 + 0.8 * (-r2 - (p[2] - cz).powi(2) / (2.0 * wz * wz)).exp()
        }));
    }
    for (a, b, c) in [(0.5, 0.0, 0.0), (0.0, -0.5, 0.0), (0.0, 0.0, 1.0), (0.3, 0.3, -0.8)] {
        out.push(TestFunction::new(format!("exp({a}*x+{b}*y+{c}*z)"), move |p| {
            (a * p[0] + b * p[1] + c * p[2]).exp()
        }));
    }
    for (kx, ky, kz, phi) in [(1.0, 0.0, 0.0, 0.2), (0.0, 1.0, 2.0, 0.0), (0.7, -0.7, 3.0, 1.0), (0.0, 0.0, 4.0, 0.5)] {
        out.push(TestFunction::new(format!("1+0.5*sin({kx}*x+{ky}*y+{kz}*z+{phi})"), move |p| {
            1.0 + 0.5 * (kx * p[0] + ky * p[1] + kz * p[2] + phi).sin()
        }));
    }
    for (s, axis, c) in [(2.0, 2usize, 0.1), (4.0, 2, -0.2), (2.0, 0, 0.3), (3.0, 1, -0.4)] {
        out.push(TestFunction::new(format!("1+0.8*tanh({s}*(x{axis}-{c}))"), move |p| {
            1.0 + 0.8 * (s * (p[axis] - c)).tanh()
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in 0..4 {
        let terms: Vec<[f64; 5]> = (0..4)
            .map(|_| {
                [
                    rng.gen_range(-0.4..0.4),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(0.0..6.3),
                ]
            })
            .collect();
        out.push(TestFunction::new(format!("cosine-mixture-{m}"), move |p| {
            2.0 + terms.iter().map(|t| t[0] * (t[1] * p[0] + t[2] * p[1] + t[3] * p[2] + t[4]).cos()).sum::<f64>()
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batteries_are_positive_and_seeded() {
        let a = ou_battery(3);
        let b = ou_battery(3);
        assert_eq!(a.len(), 20);
        for x in [-6.0, -1.0, 0.0, 2.5, 6.0] {
            for (f, g) in a.iter().zip(&b) {
                assert!(f.eval(&[x]) > 0.0, "{}", f.name);
                assert_eq!(f.eval(&[x]), g.eval(&[x]));
            }
        }
        let h = heisenberg_battery(3);
        assert_eq!(h.len(), 20);
        for p in [[0.0, 0.0, 0.0], [2.0, -2.0, 1.0], [-1.0, 1.5, -0.5]] {
            assert!(h.iter().all(|f| f.eval(&p) > 0.0));
        }
    }
}
