//! Seeded random rational polynomials for identity checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{rat, Monomial, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatterySpec {
    pub count: usize,
    pub max_degree: u32,
    /// Upper bound on the number of terms per polynomial.
    pub max_terms: usize,
    pub seed: u64,
}

impl Default for BatterySpec {
    fn default() -> Self {
        BatterySpec { count: 50, max_degree: 4, max_terms: 8, seed: 0x5eed }
    }
}

impl BatterySpec {
    pub fn generate(&self, arity: usize) -> Vec<Poly> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count).map(|_| random_polynomial(arity, self.max_degree, self.max_terms, &mut rng)).collect()
    }
}

fn monomials_up_to(arity: usize, max_degree: u32) -> Vec<Monomial> {
    fn rec(prefix: &mut Vec<u32>, arity: usize, budget: u32, out: &mut Vec<Monomial>) {
        if prefix.len() == arity {
            out.push(Monomial::from_exponents(prefix.clone()));
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(prefix, arity, budget - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), arity, max_degree, &mut out);
    out.sort();
    out
}

/// A polynomial with between one and `max_terms` distinct monomials of total
/// degree at most `max_degree` and coefficients `p/q`, `q ∈ {1,..,4}`,
/// `0 < |p/q| ≤ 3`.
pub fn random_polynomial<R: Rng + ?Sized>(arity: usize, max_degree: u32, max_terms: usize, rng: &mut R) -> Poly {
    let monos = monomials_up_to(arity, max_degree);
    let k = rng.gen_range(1..=max_terms.max(1).min(monos.len()));
    let chosen: Vec<&Monomial> = monos.choose_multiple(rng, k).collect();
    Poly::from_terms(
        arity,
        chosen.into_iter().map(|m| {
            let q: i64 = rng.gen_range(1..=4);
            let mut p: i64 = rng.gen_range(1..=3 * q);
            if rng.gen_bool(0.5) {
                p = -p;
            }
            (m.clone(), rat(p, q))
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn battery_is_seeded_and_bounded() {
        let spec = BatterySpec::default();
        let a = spec.generate(3);
        let b = spec.generate(3);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for p in &a {
            assert!(!p.is_zero());
            assert!(p.degree().unwrap() <= 4);
            assert!(p.len() <= 8);
            for (_, c) in p.terms() {
                assert!(c.abs() <= rat(3, 1));
                assert!(*c.denom() <= 4.into());
            }
        }
    }

    #[test]
    fn monomial_count() {
        // C(3 + 4, 4) monomials of degree <= 4 in 3 variables.
        assert_eq!(monomials_up_to(3, 4).len(), 35);
    }
}
