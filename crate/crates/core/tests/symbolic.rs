use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subgamma::models::{carnot_step2, euclidean, grushin, heisenberg, ornstein_uhlenbeck, ModelDescriptor};
use subgamma::symbolic::{
    check_commutation, check_symmetry, gamma, gamma2, gamma2_z, gamma_z, parse_poly, rat, random_polynomial, BatterySpec,
    DiffusionOperator, Poly, Rational,
};

fn builtins() -> Vec<ModelDescriptor> {
    vec![
        heisenberg(1).unwrap(),
        heisenberg(2).unwrap(),
        grushin(1).unwrap(),
        grushin(2).unwrap(),
        ornstein_uhlenbeck(2).unwrap(),
        euclidean(2).unwrap(),
    ]
}

fn poly_from_seed(arity: usize, seed: u64) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_polynomial(arity, 3, 6, &mut rng)
}

fn rational_from_seed(seed: u64) -> Rational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

/// Second-order coefficients and first-order drift assembled independently
/// of `DiffusionOperator::apply`: `L = A^{kl}∂_k∂_l + b^k∂_k`.
struct CoordinateForm {
    a: Vec<Vec<Poly>>,
    b: Vec<Poly>,
}

impl CoordinateForm {
    fn new(op: &DiffusionOperator) -> Self {
        let n = op.arity();
        let mut a = vec![vec![Poly::zero(n); n]; n];
        let mut b = vec![Poly::zero(n); n];
        for x in op.horizontal() {
            let c = x.coefficients();
            let xv: Poly = (0..n).fold(Poly::zero(n), |acc, k| &acc + &(&c[k] * &op.potential().partial(k)));
            for k in 0..n {
                for l in 0..n {
                    a[k][l] = &a[k][l] + &(&c[k] * &c[l]);
                }
                // X_i(X_i^k) − (X_i V) X_i^k
                let xck: Poly = (0..n).fold(Poly::zero(n), |acc, l| &acc + &(&c[l] * &c[k].partial(l)));
                b[k] = &(&b[k] + &xck) - &(&xv * &c[k]);
            }
        }
        CoordinateForm { a, b }
    }

    fn apply(&self, f: &Poly) -> Poly {
        let n = f.arity();
        let mut out = Poly::zero(n);
        for k in 0..n {
            out = &out + &(&self.b[k] * &f.partial(k));
            for l in 0..n {
                out = &out + &(&self.a[k][l] * &f.partial(k).partial(l));
            }
        }
        out
    }

    fn gamma(&self, f: &Poly, g: &Poly) -> Poly {
        let n = f.arity();
        let mut out = Poly::zero(n);
        for k in 0..n {
            for l in 0..n {
                out = &out + &(&self.a[k][l] * &(&f.partial(k) * &g.partial(l)));
            }
        }
        out
    }

    fn gamma2(&self, f: &Poly) -> Poly {
        let g = self.gamma(f, f);
        &self.apply(&g).scale(&rat(1, 2)) - &self.gamma(f, &self.apply(f))
    }
}

#[test]
fn h2_battery_vanishes_on_builtins() {
    let spec = BatterySpec { count: 20, ..BatterySpec::default() };
    for m in [heisenberg(1).unwrap(), grushin(1).unwrap()] {
        for f in spec.generate(m.operator.arity()) {
            assert!(check_commutation(&m.operator, &f).unwrap().is_zero(), "{} {}", m.name, f);
        }
    }
}

#[test]
fn symmetry_identity_on_builtins() {
    for m in builtins() {
        let n = m.operator.arity();
        for s in 0..5 {
            let f = poly_from_seed(n, 100 + s);
            let g = poly_from_seed(n, 200 + s);
            assert!(check_symmetry(&m.operator, &f, &g).unwrap().is_zero(), "{}", m.name);
        }
    }
}

#[test]
fn heisenberg_gamma2_of_z_golden() {
    let m = heisenberg(1).unwrap();
    let z = Poly::var(3, 2);
    let g2 = gamma2(&m.operator, &z).unwrap();
    let printed = format!("{}\n", g2.display(m.operator.names()));
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/heisenberg1_gamma2_z.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, &printed).unwrap();
    }
    let golden = std::fs::read_to_string(path).unwrap();
    assert_eq!(printed, golden);
    assert_eq!(g2.eval(&[rat(0, 1), rat(0, 1), rat(0, 1)]), rat(1, 2));
    // Γ₂(z) − ½Γ^Z(z) vanishes at the origin: the remaining terms are the cross terms.
    let rest = &g2 - &gamma_z(&m.operator, &z, &z).unwrap().scale(&rat(1, 2));
    assert_eq!(rest.constant_term(), rat(0, 1));
}

#[test]
fn grushin_vertical_gamma2_is_sum_of_squares() {
    let m = grushin(1).unwrap();
    let names = m.operator.names();
    let f = parse_poly("x^3*y - 2*x*y^2 + y^3/3", names).unwrap();
    let fxy = f.partial(0).partial(1);
    let fyy = f.partial(1).partial(1);
    let x = Poly::var(2, 0);
    let expected = &(&fxy * &fxy) + &(&(&x * &x) * &(&fyy * &fyy));
    assert_eq!(gamma2_z(&m.operator, &f).unwrap(), expected);
}

#[test]
fn carnot_commutators_close_at_step_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = vec![vec![vec![rat(0, 1); 3]; 3]; 2];
    for cl in c.iter_mut() {
        for i in 0..3 {
            for j in (i + 1)..3 {
                let v = rat(rng.gen_range(-2..=2), 1);
                cl[i][j] = v.clone();
                cl[j][i] = -v;
            }
        }
    }
    let m = carnot_step2(3, 2, &c).unwrap();
    let x = m.operator.horizontal();
    for i in 0..3 {
        for j in 0..3 {
            let b = x[i].bracket(&x[j]).unwrap();
            for (l, zl) in b.coefficients()[3..].iter().enumerate() {
                assert_eq!(zl.constant_term(), c[l][i][j]);
                assert!(zl.is_constant());
            }
            for k in 0..3 {
                assert!(x[k].bracket(&b).unwrap().is_zero());
            }
        }
    }
}

#[test]
fn builtin_files_match_constructors() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/models");
    for name in subgamma::models::BUILTIN_NAMES {
        let built = subgamma::models::builtin_by_name(name).unwrap();
        let path = format!("{dir}/{name}.toml");
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, built.to_toml()).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, built.to_toml(), "{name}");
        assert_eq!(ModelDescriptor::from_toml(&text).unwrap(), built, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_is_symmetric_and_bilinear(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), sa in any::<u64>(), sb in any::<u64>()) {
        for m in [heisenberg(1).unwrap(), grushin(1).unwrap(), ornstein_uhlenbeck(2).unwrap()] {
            let op = &m.operator;
            let n = op.arity();
            let (f, g, h) = (poly_from_seed(n, s1), poly_from_seed(n, s2), poly_from_seed(n, s3));
            let (a, b) = (rational_from_seed(sa), rational_from_seed(sb));
            prop_assert_eq!(gamma(op, &f, &g).unwrap(), gamma(op, &g, &f).unwrap());
            let combo = &f.scale(&a) + &h.scale(&b);
            let lhs = gamma(op, &combo, &g).unwrap();
            let rhs = &gamma(op, &f, &g).unwrap().scale(&a) + &gamma(op, &h, &g).unwrap().scale(&b);
            prop_assert_eq!(lhs, rhs);
            let lhs_z = gamma_z(op, &combo, &g).unwrap();
            let rhs_z = &gamma_z(op, &f, &g).unwrap().scale(&a) + &gamma_z(op, &h, &g).unwrap().scale(&b);
            prop_assert_eq!(lhs_z, rhs_z);
        }
    }

    #[test]
    fn gamma_matches_frame_sum_of_squares(s in any::<u64>(), pts in any::<u64>()) {
        for m in builtins() {
            let op = &m.operator;
            let n = op.arity();
            let f = poly_from_seed(n, s);
            let frame = op.horizontal().iter().fold(Poly::zero(n), |acc, x| {
                let xf = x.apply(&f).unwrap();
                &acc + &(&xf * &xf)
            });
            let g = gamma(op, &f, &f).unwrap();
            prop_assert_eq!(&g, &frame);
            let gz = gamma_z(op, &f, &f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(pts);
            for _ in 0..100 {
                let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                prop_assert!(g.eval_f64(&p) >= -1e-12);
                prop_assert!(gz.eval_f64(&p) >= -1e-12);
            }
        }
    }

    #[test]
    fn vertical_form_leibniz(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        for m in [heisenberg(1).unwrap(), grushin(1).unwrap()] {
            let op = &m.operator;
            let n = op.arity();
            let (f, g, h) = (poly_from_seed(n, s1), poly_from_seed(n, s2), poly_from_seed(n, s3));
            let lhs = gamma_z(op, &(&f * &g), &h).unwrap();
            let rhs = &(&f * &gamma_z(op, &g, &h).unwrap()) + &(&g * &gamma_z(op, &f, &h).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gamma2_agrees_with_coordinate_expansion(s in any::<u64>()) {
        for m in builtins() {
            let op = &m.operator;
            let f = poly_from_seed(op.arity(), s);
            let independent = CoordinateForm::new(op);
            prop_assert_eq!(gamma2(op, &f).unwrap(), independent.gamma2(&f));
        }
    }

    #[test]
    fn ring_laws_and_leibniz(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (f, g, h) = (poly_from_seed(3, s1), poly_from_seed(3, s2), poly_from_seed(3, s3));
        prop_assert_eq!(&(&f + &g) * &h, &(&f * &h) + &(&g * &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert!((&f - &f).is_zero());
        for k in 0..3 {
            prop_assert_eq!((&f * &g).partial(k), &(&f.partial(k) * &g) + &(&f * &g.partial(k)));
        }
    }

    #[test]
    fn parse_print_round_trip(s in any::<u64>()) {
        let names = ["x", "y", "z"];
        let owned: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        let f = poly_from_seed(3, s);
        let printed = f.display(&owned).to_string();
        prop_assert_eq!(parse_poly(&printed, &names).unwrap(), f);
    }
}
