//! First-order differential operators with polynomial coefficients.

use super::poly::Poly;
use super::SymbolicError;

/// `X = Σ_k c_k ∂_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    coefficients: Vec<Poly>,
}

impl VectorField {
    pub fn new(coefficients: Vec<Poly>) -> Result<Self, SymbolicError> {
        let n = coefficients.len();
        for c in &coefficients {
            if c.arity() != n {
                return Err(SymbolicError::ArityMismatch { expected: n, found: c.arity() });
            }
        }
        Ok(VectorField { coefficients })
    }

    /// The coordinate field `∂_index` in dimension `arity`.
    pub fn coordinate(arity: usize, index: usize) -> Self {
        let mut coefficients = vec![Poly::zero(arity); arity];
        coefficients[index] = Poly::one(arity);
        VectorField { coefficients }
    }

    pub fn arity(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Poly] {
        &self.coefficients
    }

    pub fn apply(&self, f: &Poly) -> Result<Poly, SymbolicError> {
        if f.arity() != self.arity() {
            return Err(SymbolicError::ArityMismatch { expected: self.arity(), found: f.arity() });
        }
        let mut out = Poly::zero(self.arity());
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.partial(k);
            if !d.is_zero() {
                out = &out + &(c * &d);
            }
        }
        Ok(out)
    }

    /// Euclidean divergence `Σ_k ∂_k c_k`.
    pub fn divergence(&self) -> Poly {
        let mut out = Poly::zero(self.arity());
        for (k, c) in self.coefficients.iter().enumerate() {
            out = &out + &c.partial(k);
        }
        out
    }

    /// Lie bracket `[X, Y] = XY − YX`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, SymbolicError> {
        if other.arity() != self.arity() {
            return Err(SymbolicError::ArityMismatch { expected: self.arity(), found: other.arity() });
        }
        let coefficients = (0..self.arity())
            .map(|k| Ok(&self.apply(&other.coefficients[k])? - &other.apply(&self.coefficients[k])?))
            .collect::<Result<Vec<_>, SymbolicError>>()?;
        Ok(VectorField { coefficients })
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, c: &super::Rational) -> VectorField {
        VectorField { coefficients: self.coefficients.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn max_degree(&self) -> u32 {
        self.coefficients.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }
}

impl std::ops::Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        assert_eq!(self.arity(), rhs.arity());
        VectorField {
            coefficients: self.coefficients.iter().zip(&rhs.coefficients).map(|(a, b)| a + b).collect(),
        }
    }
}
