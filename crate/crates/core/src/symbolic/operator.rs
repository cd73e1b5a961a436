//! Symmetric diffusion operators `L = Σ X_i² − (X_i V) X_i`.
//!
//! Every horizontal field must be divergence free. With `V = 0` this is the
//! sum-of-squares form symmetric for Lebesgue measure; with coordinate fields
//! it is `Δ − ∇V·∇`, symmetric for `e^{-V} dx`. Both are special cases of the
//! same weighted divergence structure, which is what [`super::check_symmetry`]
//! verifies.

use super::field::VectorField;
use super::poly::Poly;
use super::{SymbolicError, DEFAULT_DEGREE_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffusionOperator {
    names: Vec<String>,
    horizontal: Vec<VectorField>,
    vertical: Vec<VectorField>,
    potential: Poly,
    degree_cap: u32,
}

impl DiffusionOperator {
    pub fn new(
        names: Vec<String>,
        horizontal: Vec<VectorField>,
        vertical: Vec<VectorField>,
        potential: Option<Poly>,
    ) -> Result<Self, SymbolicError> {
        let n = names.len();
        if n == 0 {
            return Err(SymbolicError::InvalidOperator("no coordinates".into()));
        }
        if horizontal.is_empty() {
            return Err(SymbolicError::EmptyFrame);
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(SymbolicError::InvalidOperator(format!("duplicate coordinate {name:?}")));
            }
        }
        for x in horizontal.iter().chain(&vertical) {
            if x.arity() != n {
                return Err(SymbolicError::ArityMismatch { expected: n, found: x.arity() });
            }
        }
        for (index, x) in horizontal.iter().enumerate() {
            let div = x.divergence();
            if !div.is_zero() {
                return Err(SymbolicError::NotDivergenceFree { index, divergence: div.display(&names).to_string() });
            }
        }
        let potential = potential.unwrap_or_else(|| Poly::zero(n));
        if potential.arity() != n {
            return Err(SymbolicError::ArityMismatch { expected: n, found: potential.arity() });
        }
        Ok(DiffusionOperator { names, horizontal, vertical, potential, degree_cap: DEFAULT_DEGREE_CAP })
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn horizontal(&self) -> &[VectorField] {
        &self.horizontal
    }

    pub fn vertical(&self) -> &[VectorField] {
        &self.vertical
    }

    /// Log-density `V` of the reference measure `e^{-V} dx`.
    pub fn potential(&self) -> &Poly {
        &self.potential
    }

    pub fn has_weight(&self) -> bool {
        !self.potential.is_zero()
    }

    pub(crate) fn check_arity(&self, f: &Poly) -> Result<(), SymbolicError> {
        if f.arity() != self.arity() {
            return Err(SymbolicError::ArityMismatch { expected: self.arity(), found: f.arity() });
        }
        Ok(())
    }

    pub(crate) fn mul(&self, a: &Poly, b: &Poly) -> Result<Poly, SymbolicError> {
        a.checked_mul(b, self.degree_cap)
    }

    /// `Lf`.
    pub fn apply(&self, f: &Poly) -> Result<Poly, SymbolicError> {
        self.check_arity(f)?;
        let mut out = Poly::zero(self.arity());
        for x in &self.horizontal {
            let xf = x.apply(f)?;
            if xf.is_zero() {
                continue;
            }
            out = &out + &x.apply(&xf)?;
            if self.has_weight() {
                let xv = x.apply(&self.potential)?;
                out = &out - &self.mul(&xv, &xf)?;
            }
        }
        Ok(out)
    }

    /// Drift coefficients `−Σ_i (X_i V) X_i^k` of the first-order part.
    pub fn drift(&self) -> Result<Vec<Poly>, SymbolicError> {
        let n = self.arity();
        let mut b = vec![Poly::zero(n); n];
        if !self.has_weight() {
            return Ok(b);
        }
        for x in &self.horizontal {
            let xv = x.apply(&self.potential)?;
            for (k, c) in x.coefficients().iter().enumerate() {
                b[k] = &b[k] - &self.mul(&xv, c)?;
            }
        }
        Ok(b)
    }

    /// Second-order coefficient matrix `A^{kl} = Σ_i X_i^k X_i^l` (upper
    /// triangle filled symmetrically).
    pub fn diffusion_matrix(&self) -> Result<Vec<Vec<Poly>>, SymbolicError> {
        let n = self.arity();
        let mut a = vec![vec![Poly::zero(n); n]; n];
        for x in &self.horizontal {
            let c = x.coefficients();
            for k in 0..n {
                for l in k..n {
                    if c[k].is_zero() || c[l].is_zero() {
                        continue;
                    }
                    let p = self.mul(&c[k], &c[l])?;
                    a[k][l] = &a[k][l] + &p;
                }
            }
        }
        for k in 0..n {
            for l in 0..k {
                a[k][l] = a[l][k].clone();
            }
        }
        Ok(a)
    }
}
