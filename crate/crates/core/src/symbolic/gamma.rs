//! Γ, Γ^Z, Γ₂, Γ₂^Z and the commutation residual.

use num_traits::One;

use super::operator::DiffusionOperator;
use super::poly::{Poly, Rational};
use super::SymbolicError;

fn half() -> Rational {
    Rational::one() / Rational::from_integer(2.into())
}

/// `Γ(f,g) = ½(L(fg) − f Lg − g Lf)`.
pub fn gamma(op: &DiffusionOperator, f: &Poly, g: &Poly) -> Result<Poly, SymbolicError> {
    op.check_arity(f)?;
    op.check_arity(g)?;
    let fg = op.mul(f, g)?;
    let l_fg = op.apply(&fg)?;
    let f_lg = op.mul(f, &op.apply(g)?)?;
    let g_lf = op.mul(g, &op.apply(f)?)?;
    Ok((&(&l_fg - &f_lg) - &g_lf).scale(&half()))
}

/// `Γ^Z(f,g) = Σ_j (Z_j f)(Z_j g)`; zero when there is no vertical frame.
pub fn gamma_z(op: &DiffusionOperator, f: &Poly, g: &Poly) -> Result<Poly, SymbolicError> {
    op.check_arity(f)?;
    op.check_arity(g)?;
    let mut out = Poly::zero(op.arity());
    for z in op.vertical() {
        let zf = z.apply(f)?;
        if zf.is_zero() {
            continue;
        }
        let zg = z.apply(g)?;
        out = &out + &op.mul(&zf, &zg)?;
    }
    Ok(out)
}

/// `Γ₂(f) = ½[LΓ(f,f) − 2Γ(f,Lf)]`.
pub fn gamma2(op: &DiffusionOperator, f: &Poly) -> Result<Poly, SymbolicError> {
    let lf = op.apply(f)?;
    let g = gamma(op, f, f)?;
    Ok(&op.apply(&g)?.scale(&half()) - &gamma(op, f, &lf)?)
}

/// `Γ₂^Z(f) = ½[LΓ^Z(f,f) − 2Γ^Z(f,Lf)]`.
pub fn gamma2_z(op: &DiffusionOperator, f: &Poly) -> Result<Poly, SymbolicError> {
    let lf = op.apply(f)?;
    let g = gamma_z(op, f, f)?;
    Ok(&op.apply(&g)?.scale(&half()) - &gamma_z(op, f, &lf)?)
}

/// Polarized `Γ₂(f,g) = ½[LΓ(f,g) − Γ(f,Lg) − Γ(g,Lf)]`.
pub fn gamma2_pair(op: &DiffusionOperator, f: &Poly, g: &Poly) -> Result<Poly, SymbolicError> {
    let lf = op.apply(f)?;
    let lg = op.apply(g)?;
    let l_gamma = op.apply(&gamma(op, f, g)?)?;
    Ok((&(&l_gamma - &gamma(op, f, &lg)?) - &gamma(op, g, &lf)?).scale(&half()))
}

/// Polarized `Γ₂^Z(f,g) = ½[LΓ^Z(f,g) − Γ^Z(f,Lg) − Γ^Z(g,Lf)]`.
pub fn gamma2_z_pair(op: &DiffusionOperator, f: &Poly, g: &Poly) -> Result<Poly, SymbolicError> {
    let lf = op.apply(f)?;
    let lg = op.apply(g)?;
    let l_gamma = op.apply(&gamma_z(op, f, g)?)?;
    Ok((&(&l_gamma - &gamma_z(op, f, &lg)?) - &gamma_z(op, g, &lf)?).scale(&half()))
}

/// `Γ(f, Γ^Z(f)) − Γ^Z(f, Γ(f))`; the zero polynomial exactly when the
/// commutation hypothesis holds for `f`.
pub fn check_commutation(op: &DiffusionOperator, f: &Poly) -> Result<Poly, SymbolicError> {
    let gz = gamma_z(op, f, f)?;
    let g = gamma(op, f, f)?;
    Ok(&gamma(op, f, &gz)? - &gamma_z(op, f, &g)?)
}

/// Residual of the integration-by-parts identity
/// `g Lf + Γ(f,g) = e^{V} Σ_k ∂_k(e^{-V} F^k)` with `F^k = Σ_i g (X_i f) X_i^k`.
///
/// The right side integrates to zero against `e^{-V} dx` for compactly
/// supported `g`, so a zero residual for all `f, g` is exactly symmetry of
/// `L` with respect to that measure.
pub fn check_symmetry(op: &DiffusionOperator, f: &Poly, g: &Poly) -> Result<Poly, SymbolicError> {
    let n = op.arity();
    let mut flux = vec![Poly::zero(n); n];
    for x in op.horizontal() {
        let gxf = op.mul(g, &x.apply(f)?)?;
        for (k, c) in x.coefficients().iter().enumerate() {
            if !c.is_zero() {
                flux[k] = &flux[k] + &op.mul(&gxf, c)?;
            }
        }
    }
    let mut div = Poly::zero(n);
    for (k, fk) in flux.iter().enumerate() {
        div = &div + &fk.partial(k);
        let dv = op.potential().partial(k);
        if !dv.is_zero() {
            div = &div - &op.mul(&dv, fk)?;
        }
    }
    let lhs = &op.mul(g, &op.apply(f)?)? + &gamma(op, f, g)?;
    Ok(&lhs - &div)
}
