//! Per-jet curvature-dimension margins with `ν` eliminated in closed form.

use nalgebra::DVector;

use super::forms::QuadraticFormBundle;
use crate::params::CDParams;

/// The three scalars of the `ν`-family `a + ν b + (κ/ν) c` at one jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginParts {
    /// `Γ₂ − (Lf)²/d − ρ₁Γ − ρ₂Γ^Z`.
    pub a: f64,
    /// `Γ₂^Z`.
    pub b: f64,
    /// `Γ`.
    pub c: f64,
    /// Magnitude of the largest term, for rounding thresholds.
    pub scale: f64,
}

pub fn margin_parts(bundle: &QuadraticFormBundle, v: &DVector<f64>, params: &CDParams) -> MarginParts {
    let g2 = v.dot(&(&bundle.m_gamma2 * v));
    let g2z = v.dot(&(&bundle.m_gamma2_z * v));
    let g = v.dot(&(&bundle.m_gamma * v));
    let gz = v.dot(&(&bundle.m_gamma_z * v));
    let lf = bundle.ell.dot(v);
    let dim_term = if params.d().is_infinite() { 0.0 } else { lf * lf / params.d() };
    let a = g2 - dim_term - params.rho1() * g - params.rho2() * gz;
    let scale = g2.abs() + dim_term.abs() + g.abs() + gz.abs() + g2z.abs();
    MarginParts { a, b: g2z, c: g, scale }
}

impl MarginParts {
    fn rounding(&self) -> f64 {
        1e-12 * (1.0 + self.scale)
    }

    /// `inf_{ν>0} (a + ν b + (κ/ν) c) = a + 2√(κ b c)`, or `−∞` when `b < 0`.
    pub fn eliminated(&self, kappa: f64) -> f64 {
        if self.b < -self.rounding() {
            return f64::NEG_INFINITY;
        }
        let b = self.b.max(0.0);
        let c = self.c.max(0.0);
        self.a + 2.0 * (kappa * b * c).sqrt()
    }

    pub fn at_nu(&self, kappa: f64, nu: f64) -> f64 {
        self.a + nu * self.b + kappa / nu * self.c
    }

    /// Minimizing `ν`, when it is attained.
    pub fn optimal_nu(&self, kappa: f64) -> Option<f64> {
        let b = self.b;
        let kc = kappa * self.c;
        if b > self.rounding() && kc > self.rounding() {
            Some((kc / b).sqrt())
        } else {
            None
        }
    }
}

/// Closed-form margin; CD holds at this jet iff the result is `≥ 0`.
pub fn cd_margin_at_jet(bundle: &QuadraticFormBundle, v: &DVector<f64>, params: &CDParams) -> f64 {
    margin_parts(bundle, v, params).eliminated(params.kappa())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cd::forms::{jet_forms, jet_of};
    use crate::models::{euclidean, ornstein_uhlenbeck};
    use crate::symbolic::parse_poly;

    #[test]
    fn zero_jet_has_zero_margin() {
        let b = jet_forms(&ornstein_uhlenbeck(1).unwrap().operator, &[0.5]).unwrap();
        let p = CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(cd_margin_at_jet(&b, &DVector::zeros(2), &p), 0.0);
    }

    #[test]
    fn ou_margin_is_hessian_square() {
        let b = jet_forms(&ornstein_uhlenbeck(1).unwrap().operator, &[-1.5]).unwrap();
        let p = CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap();
        let v = DVector::from_vec(vec![2.0, -0.75]);
        assert!((cd_margin_at_jet(&b, &v, &p) - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn euclidean_square_is_tight() {
        let m = euclidean(1).unwrap();
        let b = jet_forms(&m.operator, &[0.2]).unwrap();
        let p = CDParams::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let f = parse_poly("x^2", &["x"]).unwrap();
        assert!(cd_margin_at_jet(&b, &jet_of(&f, &[0.2]), &p).abs() < 1e-12);
    }

    #[test]
    fn negative_vertical_curvature_is_unbounded() {
        let parts = MarginParts { a: 1.0, b: -0.5, c: 1.0, scale: 2.0 };
        assert_eq!(parts.eliminated(1.0), f64::NEG_INFINITY);
        let parts = MarginParts { a: -1.0, b: 4.0, c: 1.0, scale: 5.0 };
        assert!((parts.eliminated(1.0) - 3.0).abs() < 1e-15);
        assert_eq!(parts.optimal_nu(1.0), Some(0.5));
        assert!((parts.at_nu(1.0, 0.5) - 3.0).abs() < 1e-15);
    }
}
