use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subgamma::geometry::{horizontal_perimeter, isoperimetric_constant, verify_isoperimetry, GridSet};
use subgamma::heat::{discretize, Boundary, GridModel, GridSpec};
use subgamma::models::ornstein_uhlenbeck;
use subgamma::CDParams;

fn ou(h: f64) -> GridModel {
    let m = ornstein_uhlenbeck(1).unwrap();
    let spec = GridSpec::for_operator(&m.operator, h, &[(-6.0, 6.0)], Boundary::ZeroFlux).unwrap();
    discretize(&m, &spec).unwrap()
}

fn ou_params() -> CDParams {
    CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap()
}

fn gaussian_density(x: f64) -> f64 {
    (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn half_lines_against_gaussian_values() {
    let g = ou(0.05);
    let k = isoperimetric_constant(&ou_params(), 1.0);
    assert!((k - std::f64::consts::LN_2 / 12.0).abs() < 1e-15);
    for c in [0.0, -0.5, -1.0, -2.0] {
        let a = GridSet::parse(&g, &format!("x <= {c}"), &["x"]).unwrap();
        let p = horizontal_perimeter(&g, &a, 4).unwrap();
        // On-threshold nodes belong to the set, so the jump sits at c + h/2.
        let edge = gaussian_density(c + g.h() / 2.0);
        assert!((p.value - edge).abs() < 1e-2 * edge, "{c}: {:?}", p.curve);
        let r = verify_isoperimetry(&g, &a, 1.0, &ou_params(), 4, &format!("x <= {c}")).unwrap();
        let w = r.worst.as_ref().unwrap();
        assert!(r.passed() && w.rhs / w.lhs >= 10.0, "{c}: {w:?}");
    }
}

#[test]
fn tail_example_values() {
    let g = ou(0.05);
    let a = GridSet::parse(&g, "x <= -2", &["x"]).unwrap();
    assert!((a.measure() - 0.02275).abs() < 2e-3, "{}", a.measure());
    let r = verify_isoperimetry(&g, &a, 1.0, &ou_params(), 4, "tail").unwrap();
    let rhs = r.worst.unwrap().lhs;
    assert!((rhs - 0.00256).abs() < 2.5e-4, "{rhs}");
}

#[test]
fn perimeter_curve_flattens() {
    let g = ou(0.05);
    let a = GridSet::sublevel(&g, |p| (2.0 * p[0]).cos() + 0.5 * p[0], 0.2);
    let p = horizontal_perimeter(&g, &a, 12).unwrap();
    assert!(p.stabilized, "{:?}", p.curve);
    for w in p.curve[2..].windows(2) {
        assert!(w[1] <= w[0] + 1e-3 * w[0], "{:?}", p.curve);
    }
}

#[test]
fn random_threshold_sets_pass() {
    let g = ou(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0;
    while checked < 50 {
        let (a1, w1, p1, slope) =
            (rng.gen_range(0.2..1.5), rng.gen_range(0.3..3.0), rng.gen_range(0.0..6.3), rng.gen_range(-1.0..1.0));
        let f = move |p: &[f64]| a1 * (w1 * p[0] + p1).sin() + slope * p[0];
        let c = rng.gen_range(-1.5..1.5);
        let set = GridSet::sublevel(&g, f, c);
        if set.measure() > 0.5 || set.is_empty() {
            continue;
        }
        let r = verify_isoperimetry(&g, &set, 1.0, &ou_params(), 4, &format!("set-{checked}")).unwrap();
        assert!(r.passed(), "{:?}", r.worst);
        let comp = horizontal_perimeter(&g, &set.complement(&g), 4).unwrap().value;
        let own = horizontal_perimeter(&g, &set, 4).unwrap().value;
        assert!((comp - own).abs() < 1e-8);
        checked += 1;
    }
}
