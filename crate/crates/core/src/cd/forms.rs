//! Pointwise quadratic forms on 2-jets.
//!
//! At a base point `p`, Γ, Γ^Z, Γ₂, Γ₂^Z and `L` only see the 2-jet of `f`.
//! The forms are obtained once, symbolically, by polarizing on the basis
//! `(x_a − p_a)`, `(x_a − p_a)(x_b − p_b)`, `½(x_a − p_a)²` in a lifted ring
//! where `p` is a second block of variables, then substituting `x = p`. The
//! result is a polynomial in the base point for every matrix entry.

use nalgebra::{DMatrix, DVector};

use crate::symbolic::{
    gamma, gamma2_pair, gamma2_z_pair, gamma_z, rat, DiffusionOperator, NumericPoly, Poly,
    SymbolicError, VectorField,
};

/// Length of a 2-jet vector in `n` coordinates.
pub fn jet_len(n: usize) -> usize {
    n + n * (n + 1) / 2
}

/// Index pairs `(a, b)`, `a ≤ b`, of the second-derivative slots in jet order.
pub fn second_order_slots(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            out.push((a, b));
        }
    }
    out
}

/// The 2-jet `(∂_a f, ∂_a∂_b f (a ≤ b))` of a polynomial at `point`.
pub fn jet_of(f: &Poly, point: &[f64]) -> DVector<f64> {
    let n = f.arity();
    let mut v = Vec::with_capacity(jet_len(n));
    for a in 0..n {
        v.push(f.partial(a).eval_f64(point));
    }
    for (a, b) in second_order_slots(n) {
        v.push(f.partial(a).partial(b).eval_f64(point));
    }
    DVector::from_vec(v)
}

/// Per-point matrices such that `vᵀ M v` reproduces each form for the 2-jet `v`.
#[derive(Clone, Debug)]
pub struct QuadraticFormBundle {
    pub point: Vec<f64>,
    pub m_gamma: DMatrix<f64>,
    pub m_gamma_z: DMatrix<f64>,
    pub m_gamma2: DMatrix<f64>,
    pub m_gamma2_z: DMatrix<f64>,
    /// `Lf = ℓ·v`.
    pub ell: DVector<f64>,
}

impl QuadraticFormBundle {
    pub fn dim(&self) -> usize {
        self.ell.len()
    }
}

/// Symbolic jet forms of a model; entries are polynomials in the base point.
#[derive(Clone, Debug)]
pub struct JetForms {
    n: usize,
    gamma: Vec<NumericPoly>,
    gamma_z: Vec<NumericPoly>,
    gamma2: Vec<NumericPoly>,
    gamma2_z: Vec<NumericPoly>,
    ell: Vec<NumericPoly>,
}

fn lift(op: &DiffusionOperator) -> Result<DiffusionOperator, SymbolicError> {
    let n = op.arity();
    let extend = |x: &VectorField| {
        let mut c: Vec<Poly> = x.coefficients().iter().map(|p| p.extend_arity(2 * n)).collect();
        c.resize(2 * n, Poly::zero(2 * n));
        VectorField::new(c)
    };
    let mut names = op.names().to_vec();
    names.extend(op.names().iter().map(|s| format!("base_{s}")));
    DiffusionOperator::new(
        names,
        op.horizontal().iter().map(extend).collect::<Result<_, _>>()?,
        op.vertical().iter().map(extend).collect::<Result<_, _>>()?,
        Some(op.potential().extend_arity(2 * n)),
    )
    .map(|l| l.with_degree_cap(op.degree_cap()))
}

fn basis(n: usize) -> Vec<Poly> {
    let m = 2 * n;
    let d: Vec<Poly> = (0..n).map(|a| &Poly::var(m, a) - &Poly::var(m, n + a)).collect();
    let mut out: Vec<Poly> = d.clone();
    for (a, b) in second_order_slots(n) {
        if a == b {
            out.push((&d[a] * &d[a]).scale(&rat(1, 2)));
        } else {
            out.push(&d[a] * &d[b]);
        }
    }
    out
}

impl JetForms {
    pub fn new(op: &DiffusionOperator) -> Result<Self, SymbolicError> {
        let n = op.arity();
        let lifted = lift(op)?;
        let phi = basis(n);
        let k = phi.len();
        let mut forms = JetForms {
            n,
            gamma: Vec::with_capacity(k * (k + 1) / 2),
            gamma_z: Vec::with_capacity(k * (k + 1) / 2),
            gamma2: Vec::with_capacity(k * (k + 1) / 2),
            gamma2_z: Vec::with_capacity(k * (k + 1) / 2),
            ell: Vec::with_capacity(k),
        };
        for i in 0..k {
            for j in i..k {
                let (f, g) = (&phi[i], &phi[j]);
                forms.gamma.push(gamma(&lifted, f, g)?.fold_halves().to_numeric());
                forms.gamma_z.push(gamma_z(&lifted, f, g)?.fold_halves().to_numeric());
                forms.gamma2.push(gamma2_pair(&lifted, f, g)?.fold_halves().to_numeric());
                forms.gamma2_z.push(gamma2_z_pair(&lifted, f, g)?.fold_halves().to_numeric());
            }
            forms.ell.push(lifted.apply(&phi[i])?.fold_halves().to_numeric());
        }
        Ok(forms)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn jet_len(&self) -> usize {
        jet_len(self.n)
    }

    fn matrix(&self, entries: &[NumericPoly], point: &[f64]) -> DMatrix<f64> {
        let k = self.jet_len();
        let mut m = DMatrix::zeros(k, k);
        let mut idx = 0;
        for i in 0..k {
            for j in i..k {
                let v = entries[idx].eval(point);
                m[(i, j)] = v;
                m[(j, i)] = v;
                idx += 1;
            }
        }
        m
    }

    /// Numeric bundle at `point`.
    pub fn at(&self, point: &[f64]) -> QuadraticFormBundle {
        assert_eq!(point.len(), self.n);
        QuadraticFormBundle {
            point: point.to_vec(),
            m_gamma: self.matrix(&self.gamma, point),
            m_gamma_z: self.matrix(&self.gamma_z, point),
            m_gamma2: self.matrix(&self.gamma2, point),
            m_gamma2_z: self.matrix(&self.gamma2_z, point),
            ell: DVector::from_iterator(self.jet_len(), self.ell.iter().map(|p| p.eval(point))),
        }
    }
}

/// Convenience wrapper: build the symbolic forms and evaluate at one point.
pub fn jet_forms(op: &DiffusionOperator, point: &[f64]) -> Result<QuadraticFormBundle, SymbolicError> {
    Ok(JetForms::new(op)?.at(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{euclidean, heisenberg, ornstein_uhlenbeck};
    use crate::symbolic::{gamma2, parse_poly};

    fn quad(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
        v.dot(&(m * v))
    }

    #[test]
    fn euclidean_forms() {
        let b = jet_forms(&euclidean(1).unwrap().operator, &[0.3]).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.m_gamma, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(b.ell, DVector::from_vec(vec![0.0, 1.0]));
    }

    #[test]
    fn heisenberg_origin_gamma() {
        let b = jet_forms(&heisenberg(1).unwrap().operator, &[0.0, 0.0, 0.0]).unwrap();
        let v = DVector::from_fn(9, |i, _| (i as f64 + 1.0) * 0.37 - 1.0);
        let expected = v[0] * v[0] + v[1] * v[1];
        assert!((quad(&b.m_gamma, &v) - expected).abs() < 1e-12);
    }

    #[test]
    fn ou_gamma2_independent_of_point() {
        let b = jet_forms(&ornstein_uhlenbeck(1).unwrap().operator, &[2.0]).unwrap();
        let v = DVector::from_vec(vec![0.7, -1.3]);
        assert!((quad(&b.m_gamma2, &v) - (0.7f64.powi(2) + 1.3f64.powi(2))).abs() < 1e-12);
    }

    #[test]
    fn matches_symbolic_gamma2() {
        let m = heisenberg(1).unwrap();
        let f = parse_poly("x^2*z - 3/2*y*z^2 + x*y + z^3/5", m.operator.names()).unwrap();
        let p = [0.4, -1.1, 0.8];
        let b = jet_forms(&m.operator, &p).unwrap();
        let v = jet_of(&f, &p);
        let direct = gamma2(&m.operator, &f).unwrap().eval_f64(&p);
        assert!((quad(&b.m_gamma2, &v) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }
}
