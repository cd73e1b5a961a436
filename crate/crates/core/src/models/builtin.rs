//! Built-in model families.

use num_traits::Zero;

use super::{ClaimedParams, ModelDescriptor, ModelError, ParamSpec};
use crate::symbolic::{rat, DiffusionOperator, Poly, Rational, VectorField};

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn exact(num: i64, den: i64) -> ParamSpec {
    ParamSpec::Exact(rat(num, den))
}

fn positive(n: usize, what: &str) -> Result<(), ModelError> {
    if n < 1 {
        return Err(ModelError::Size(format!("{what} must be at least 1, got {n}")));
    }
    Ok(())
}

/// Heisenberg group `H^{2n+1}` with `X_i = ∂x_i − (y_i/2)∂z`,
/// `Y_i = ∂y_i + (x_i/2)∂z` and `Z = ∂z`; claimed `CD(0, n/2, 1, 2n)`.
pub fn heisenberg(n: usize) -> Result<ModelDescriptor, ModelError> {
    positive(n, "n")?;
    let dim = 2 * n + 1;
    let mut names = indexed("x", n);
    names.extend(indexed("y", n));
    names.push("z".into());
    let z = dim - 1;
    let mut frame = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut c = vec![Poly::zero(dim); dim];
        c[i] = Poly::one(dim);
        c[z] = Poly::var(dim, n + i).scale(&rat(-1, 2));
        frame.push(VectorField::new(c)?);
    }
    for i in 0..n {
        let mut c = vec![Poly::zero(dim); dim];
        c[n + i] = Poly::one(dim);
        c[z] = Poly::var(dim, i).scale(&rat(1, 2));
        frame.push(VectorField::new(c)?);
    }
    let op = DiffusionOperator::new(names, frame, vec![VectorField::coordinate(dim, z)], None)?;
    let claimed = ClaimedParams {
        rho1: exact(0, 1),
        rho2: exact(n as i64, 2),
        kappa: exact(1, 1),
        d: exact(2 * n as i64, 1),
    };
    ModelDescriptor::new(format!("heisenberg-{n}"), op, claimed, false, false, vec![])
}

/// Grushin-type operator on `ℝ^{2n}` with frame `X_i = ∂x_i`,
/// `Y_{i,j} = x_j ∂y_i` and vertical fields `Z_i = ∂y_i`. Only `ρ₁ = 0`
/// and `d = n + n²` are claimed; `ρ₂` and `κ` are left to search.
pub fn grushin(n: usize) -> Result<ModelDescriptor, ModelError> {
    positive(n, "n")?;
    let dim = 2 * n;
    let mut names = indexed("x", n);
    names.extend(indexed("y", n));
    let mut frame: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(dim, i)).collect();
    for i in 0..n {
        for j in 0..n {
            let mut c = vec![Poly::zero(dim); dim];
            c[n + i] = Poly::var(dim, j);
            frame.push(VectorField::new(c)?);
        }
    }
    let vertical = (0..n).map(|i| VectorField::coordinate(dim, n + i)).collect();
    let op = DiffusionOperator::new(names, frame, vertical, None)?;
    let claimed = ClaimedParams {
        rho1: exact(0, 1),
        rho2: ParamSpec::Search,
        kappa: ParamSpec::Search,
        d: exact((n + n * n) as i64, 1),
    };
    let notes = vec![
        "frame normalization: the sum of squares carries |x|^2 on each y-direction; \
         the half-coefficient presentation is this operator scaled by 1/2 in the y-block"
            .to_string(),
    ];
    ModelDescriptor::new(format!("grushin-{n}"), op, claimed, false, false, notes)
}

/// Structure constants `c^l_{ij}` indexed as `c[l][i][j]`.
pub type StructureConstants = Vec<Vec<Vec<Rational>>>;

/// Step-two Carnot group on `ℝ^{m+k}` in exponential coordinates:
/// `X_i = ∂x_i − ½ Σ_{j,l} c^l_{ij} x_j ∂z_l`, so `[X_i, X_j] = Σ_l c^l_{ij} ∂z_l`.
pub fn carnot_step2(m: usize, k: usize, c: &StructureConstants) -> Result<ModelDescriptor, ModelError> {
    positive(m, "m")?;
    positive(k, "k")?;
    if c.len() != k || c.iter().any(|cl| cl.len() != m || cl.iter().any(|row| row.len() != m)) {
        return Err(ModelError::StructureConstants(format!("expected shape {k} x {m} x {m}")));
    }
    for (l, cl) in c.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                if cl[i][j] != -cl[j][i].clone() {
                    return Err(ModelError::StructureConstants(format!(
                        "c^{}_{{{},{}}} is not antisymmetric",
                        l + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }
    let dim = m + k;
    let mut names = indexed("x", m);
    names.extend(indexed("z", k));
    let half = rat(-1, 2);
    let mut frame = Vec::with_capacity(m);
    for i in 0..m {
        let mut coeffs = vec![Poly::zero(dim); dim];
        coeffs[i] = Poly::one(dim);
        for (l, cl) in c.iter().enumerate() {
            for (j, cij) in cl[i].iter().enumerate() {
                if !cij.is_zero() {
                    coeffs[m + l] = &coeffs[m + l] + &Poly::var(dim, j).scale(&(cij * &half));
                }
            }
        }
        frame.push(VectorField::new(coeffs)?);
    }
    let vertical = (0..k).map(|l| VectorField::coordinate(dim, m + l)).collect();
    let op = DiffusionOperator::new(names, frame, vertical, None)?;
    let claimed =
        ClaimedParams { rho1: exact(0, 1), rho2: ParamSpec::Search, kappa: ParamSpec::Search, d: ParamSpec::Search };
    ModelDescriptor::new(format!("carnot-{m}-{k}"), op, claimed, false, false, vec![])
}

/// `L = Δ − x·∇` for the standard Gaussian measure; claimed `CD(1, ·, 0, ∞)`.
pub fn ornstein_uhlenbeck(n: usize) -> Result<ModelDescriptor, ModelError> {
    positive(n, "n")?;
    let names = indexed("x", n);
    let frame = (0..n).map(|i| VectorField::coordinate(n, i)).collect();
    let mut v = Poly::zero(n);
    for i in 0..n {
        v = &v + &Poly::var(n, i).pow(2);
    }
    let v = v.scale(&rat(1, 2));
    let op = DiffusionOperator::new(names, frame, vec![], Some(v))?;
    let claimed = ClaimedParams { rho1: exact(1, 1), rho2: ParamSpec::Free, kappa: exact(0, 1), d: ParamSpec::Infinite };
    ModelDescriptor::new(format!("ornstein-uhlenbeck-{n}"), op, claimed, false, true, vec![])
}

/// Flat Laplacian on `ℝ^n`; claimed `CD(0, ·, 0, n)`.
pub fn euclidean(n: usize) -> Result<ModelDescriptor, ModelError> {
    positive(n, "n")?;
    let frame = (0..n).map(|i| VectorField::coordinate(n, i)).collect();
    let op = DiffusionOperator::new(indexed("x", n), frame, vec![], None)?;
    let claimed =
        ClaimedParams { rho1: exact(0, 1), rho2: ParamSpec::Free, kappa: exact(0, 1), d: exact(n as i64, 1) };
    ModelDescriptor::new(format!("euclidean-{n}"), op, claimed, false, false, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{gamma, gamma2, gamma_z, parse_poly};

    #[test]
    fn size_validation() {
        assert!(heisenberg(0).is_err());
        assert!(grushin(0).is_err());
        assert!(ornstein_uhlenbeck(0).is_err());
        assert!(euclidean(0).is_err());
    }

    #[test]
    fn heisenberg_claims() {
        let h1 = heisenberg(1).unwrap();
        assert_eq!(h1.operator.arity(), 3);
        assert_eq!(h1.claimed.resolve(1.0).unwrap().unwrap(), crate::CDParams::new(0.0, 0.5, 1.0, 2.0).unwrap());
        let h2 = heisenberg(2).unwrap();
        assert_eq!(h2.operator.arity(), 5);
        assert_eq!(h2.claimed.resolve(1.0).unwrap().unwrap(), crate::CDParams::new(0.0, 1.0, 1.0, 4.0).unwrap());
        let h = h1.operator.horizontal();
        assert_eq!(h[0].bracket(&h[1]).unwrap(), VectorField::coordinate(3, 2));
    }

    #[test]
    fn grushin_structure() {
        let g = grushin(1).unwrap();
        assert_eq!(g.claimed.rho2, ParamSpec::Search);
        assert_eq!(g.claimed.d, exact(2, 1));
        let y = Poly::var(2, 1);
        assert_eq!(gamma(&g.operator, &y, &y).unwrap(), parse_poly("x^2", &["x", "y"]).unwrap());
        let f = parse_poly("x^2*y", &["x", "y"]).unwrap();
        assert_eq!(gamma_z(&g.operator, &f, &f).unwrap(), parse_poly("x^4", &["x", "y"]).unwrap());
        let frame = g.operator.horizontal();
        assert_eq!(frame[0].bracket(&frame[1]).unwrap(), VectorField::coordinate(2, 1));
    }

    #[test]
    fn carnot_reproduces_heisenberg() {
        let c = vec![vec![vec![rat(0, 1), rat(1, 1)], vec![rat(-1, 1), rat(0, 1)]]];
        let carnot = carnot_step2(2, 1, &c).unwrap();
        assert_eq!(carnot.operator.horizontal(), heisenberg(1).unwrap().operator.horizontal());
        let c2 = vec![vec![vec![rat(0, 1), rat(2, 1)], vec![rat(-2, 1), rat(0, 1)]]];
        let carnot = carnot_step2(2, 1, &c2).unwrap();
        let f = carnot.operator.horizontal();
        assert_eq!(f[0].bracket(&f[1]).unwrap(), VectorField::coordinate(3, 2).scale(&rat(2, 1)));
    }

    #[test]
    fn carnot_rejects_non_antisymmetric() {
        let c = vec![vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]]];
        assert!(matches!(carnot_step2(2, 1, &c), Err(ModelError::StructureConstants(_))));
        assert!(matches!(carnot_step2(2, 2, &c), Err(ModelError::StructureConstants(_))));
    }

    #[test]
    fn commutative_carnot_has_no_vertical_energy_on_horizontal_functions() {
        let c = vec![vec![vec![rat(0, 1); 3]; 3]; 2];
        let m = carnot_step2(3, 2, &c).unwrap();
        let names = m.operator.names().to_vec();
        let f = parse_poly("x1^2*x2 - x3^3 + x1", &names).unwrap();
        assert!(gamma_z(&m.operator, &f, &f).unwrap().is_zero());
    }

    #[test]
    fn euclidean_square_is_tight() {
        let e = euclidean(1).unwrap();
        let f = parse_poly("x^2", &["x"]).unwrap();
        assert_eq!(gamma2(&e.operator, &f).unwrap(), Poly::constant(1, rat(4, 1)));
        let lf = e.operator.apply(&f).unwrap();
        assert_eq!(&lf * &lf, Poly::constant(1, rat(4, 1)));
    }

    #[test]
    fn ou_gamma2_minus_gamma_is_hessian_square() {
        let m = ornstein_uhlenbeck(1).unwrap();
        let f = parse_poly("x^4 - 2*x^2 + x/3", &["x"]).unwrap();
        let diff = &gamma2(&m.operator, &f).unwrap() - &gamma(&m.operator, &f, &f).unwrap();
        let f2 = f.partial(0).partial(0);
        assert_eq!(diff, &f2 * &f2);
        assert!(m.finite_measure);
    }
}
