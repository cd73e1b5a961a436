use proptest::prelude::*;

use subgamma::heat::{
    discretize, entropy, fisher, spectral_gap, verify_inequality, Boundary, CheckInputs, GridModel, GridSpec,
    InequalityId, NodeSelection, PairSelection, Semigroup, TestFunction,
};
use subgamma::models::{euclidean, ornstein_uhlenbeck};
use subgamma::report::Verdict;
use subgamma::CDParams;

fn ou_grid(h: f64) -> GridModel {
    let m = ornstein_uhlenbeck(1).unwrap();
    let spec = GridSpec::for_operator(&m.operator, h, &[(-6.0, 6.0)], Boundary::ZeroFlux).unwrap();
    discretize(&m, &spec).unwrap()
}

fn ou_params() -> CDParams {
    CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap()
}

/// Transition density of the unit OU process against the standard Gaussian.
fn mehler(x: f64, y: f64, t: f64) -> f64 {
    let e = (-t).exp();
    let v = 1.0 - e * e;
    (-(e * e * (x * x + y * y) - 2.0 * e * x * y) / (2.0 * v)).exp() / v.sqrt()
}

const PROBES: [(f64, f64); 3] = [(0.0, 0.0), (0.0, 1.0), (-1.0, -0.5)];
const PROBE_TIMES: [f64; 3] = [0.1, 0.5, 1.0];

#[test]
fn ou_kernel_matches_mehler() {
    let g = ou_grid(0.0125);
    let sg = Semigroup::new(&g);
    for &(x, y) in &PROBES {
        let (i, j) = (g.nearest(&[x]), g.nearest(&[y]));
        for &t in &PROBE_TIMES {
            let k = sg.kernel(i, t).unwrap()[j];
            let m = mehler(g.point(i)[0], g.point(j)[0], t);
            assert!((k - m).abs() <= 1e-3 * m, "({x}, {y}, {t}): {k} vs {m}");
        }
    }
}

#[test]
fn kernel_lower_bound_at_probes_and_diagonal() {
    let g = ou_grid(0.05);
    let mut inputs = CheckInputs::new(Vec::new());
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = PROBES.iter().map(|&(x, y)| (vec![x], vec![y])).collect();
    pairs.extend([-2.0, 0.5, 3.0].iter().map(|&x| (vec![x], vec![x])));
    inputs.pairs = PairSelection::Points(pairs);
    let r = verify_inequality(&g, InequalityId::KernelLower, &inputs, &PROBE_TIMES, &ou_params()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.worst);
    let sg = Semigroup::new(&g);
    for x in [-3.0, 0.0, 2.0] {
        let i = g.nearest(&[x]);
        assert!(sg.kernel(i, 0.2).unwrap()[i] >= 1.0);
    }
}

#[test]
fn entropy_decays_along_the_flow() {
    let g = ou_grid(0.05);
    let f = g.sample(|p| 0.05 + (-(p[0] - 1.5).powi(2)).exp() + 0.5 * (2.0 * p[0]).sin().powi(2));
    let times: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
    let us = Semigroup::new(&g).apply_times(&f, &times).unwrap();
    let ents: Vec<f64> = us.iter().map(|u| entropy(g.mu(), u).unwrap()).collect();
    for w in ents.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{ents:?}");
    }
    // d/dt Ent = −I(P_t f): compare a centered difference with the Fisher information.
    let dt = 1e-3;
    let v = Semigroup::new(&g).apply_times(&f, &[0.5 - dt, 0.5, 0.5 + dt]).unwrap();
    let slope = (entropy(g.mu(), &v[2]).unwrap() - entropy(g.mu(), &v[0]).unwrap()) / (2.0 * dt);
    let info = fisher(&g, &v[1]).unwrap();
    assert!((slope + info).abs() < 1e-4 * info, "{slope} vs {info}");
}

#[test]
fn large_time_converges_to_the_mean() {
    let g = ou_grid(0.05);
    let f = g.sample(|p| (p[0] / 2.0).tanh() + 2.0);
    let mean = g.integrate(&f) / g.total_mass();
    let u = Semigroup::new(&g).apply(&f, 20.0).unwrap();
    assert!(u.iter().all(|v| (v - mean).abs() < 1e-7));
}

#[test]
fn spectral_anchors() {
    let g = ou_grid(0.05);
    let gap = spectral_gap(g.generator(), g.mu()).unwrap();
    assert!((0.98..=1.02).contains(&gap.gap), "{gap:?}");

    let m = euclidean(1).unwrap();
    let spec = GridSpec::for_operator(&m.operator, 0.01, &[(0.0, 1.0)], Boundary::Periodic).unwrap();
    let p = discretize(&m, &spec).unwrap();
    let gap = spectral_gap(p.generator(), p.mu()).unwrap();
    let target = 4.0 * std::f64::consts::PI.powi(2);
    assert!((gap.gap - target).abs() < 0.02 * target, "{}", gap.gap);
}

#[test]
fn poincare_and_lsi_on_ou_battery() {
    let g = ou_grid(0.05);
    let mut inputs = CheckInputs::new(subgamma::heat::ou_battery(7));
    inputs.nodes = NodeSelection::Interior(2.0 / 3.0);
    inputs.rho0 = Some(1.0);
    for id in [InequalityId::Poincare, InequalityId::Lsi, InequalityId::MlsiVertical] {
        let r = verify_inequality(&g, id, &inputs, &[], &ou_params()).unwrap();
        assert!(r.passed(), "{id}: {:?}", r.worst);
        assert!(!r.constants.is_empty());
    }
}

fn grid_function() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.5..0.5f64, 0.2..2.0f64, 0.0..6.3f64), 1..5)
}

fn eval(terms: &[(f64, f64, f64)]) -> TestFunction {
    let terms = terms.to_vec();
    TestFunction::new("mix", move |p| 1.5 + terms.iter().map(|(a, w, c)| a * (w * p[0] + c).cos()).sum::<f64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn semigroup_symmetry_and_positivity(a in grid_function(), b in grid_function()) {
        let g = ou_grid(0.1);
        let sg = Semigroup::new(&g);
        let f = eval(&a).sample(&g);
        let h = eval(&b).sample(&g);
        let two = sg.apply(&sg.apply(&f, 0.1).unwrap(), 0.2).unwrap();
        let once = sg.apply(&f, 0.3).unwrap();
        prop_assert!(two.iter().zip(&once).all(|(x, y)| (x - y).abs() < 1e-8));
        let lhs = sg.inner(&h, &once);
        let rhs = sg.inner(&f, &sg.apply(&h, 0.3).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
        let bump: Vec<f64> = f.iter().map(|v| (v - 1.5).max(0.0)).collect();
        prop_assert!(sg.apply(&bump, 0.05).unwrap().iter().all(|v| *v >= -1e-12));
    }
}
