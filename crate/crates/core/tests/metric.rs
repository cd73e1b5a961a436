use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subgamma::heat::{discretize, Boundary, GridModel, GridSpec};
use subgamma::metric::{
    inf_convolution, normalize_density, sinkhorn, subriemannian_distance, transport_simplex, verify_entropy_wasserstein,
    verify_modified_hwi, wasserstein2, DistanceMatrix,
};
use subgamma::models::ornstein_uhlenbeck;
use subgamma::CDParams;

fn ou(h: f64) -> (GridModel, DistanceMatrix) {
    let m = ornstein_uhlenbeck(1).unwrap();
    let spec = GridSpec::for_operator(&m.operator, h, &[(-6.0, 6.0)], Boundary::ZeroFlux).unwrap();
    let g = discretize(&m, &spec).unwrap();
    let all: Vec<usize> = (0..g.nodes()).collect();
    let d = subriemannian_distance(&g, &all).unwrap();
    (g, d)
}

fn ou_params() -> CDParams {
    CDParams::new(1.0, 1.0, 0.0, f64::INFINITY).unwrap()
}

/// `W₂` between two measures on sorted points of the line via the quantile coupling.
fn quantile_w2(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    let mut cost = 0.0;
    loop {
        let m = ra.min(rb);
        cost += m * (x[i] - x[j]).powi(2);
        ra -= m;
        rb -= m;
        if ra <= 1e-300 {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = a[i];
        }
        if rb <= 1e-300 {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = b[j];
        }
    }
    cost.sqrt()
}

#[test]
fn shifted_gaussian_distance() {
    let (g, d) = ou(0.05);
    let m = 0.5;
    let nu: Vec<f64> = normalize_density(&g, &g.sample(|p| (m * p[0]).exp()))
        .iter()
        .zip(g.mu())
        .map(|(f, w)| f * w)
        .collect();
    let (w2, r) = wasserstein2(&d, g.mu(), &nu).unwrap();
    let xs: Vec<f64> = (0..g.nodes()).map(|i| g.point(i)[0]).collect();
    let oracle = quantile_w2(&xs, g.mu(), &nu);
    assert!((w2 - oracle).abs() < 1e-9, "{w2} vs quantile {oracle}");
    assert!((w2 - m).abs() <= 2.0 * g.h(), "{w2}");
    assert!(r.duality_gap <= 1e-8);
    assert!(r.plan.marginal_defect() <= 1e-8 && r.plan.min_entry() >= 0.0);
}

#[test]
fn trivial_couplings() {
    let (g, d) = ou(0.1);
    let (w, _) = wasserstein2(&d, g.mu(), g.mu()).unwrap();
    assert!(w.abs() < 1e-12);
    let (x, y) = (g.nearest(&[-1.0]), g.nearest(&[2.0]));
    let mut a = vec![0.0; g.nodes()];
    let mut b = vec![0.0; g.nodes()];
    a[x] = 1.0;
    b[y] = 1.0;
    let (w, r) = wasserstein2(&d, &a, &b).unwrap();
    assert!((w - d.get(x, y).unwrap()).abs() < 1e-12);
    assert_eq!(r.plan.entries, vec![(x, y, 1.0)]);
}

#[test]
fn inf_convolution_examples() {
    let (g, d) = ou(0.1);
    let zero = vec![0.0; g.nodes()];
    assert!(inf_convolution(&zero, 0.5, &d).unwrap().iter().all(|v| *v == 0.0));
    let phi = g.sample(|p| (p[0]).sin());
    let q = inf_convolution(&phi, 1e-3, &d).unwrap();
    assert!(q.iter().zip(&phi).all(|(a, b)| (a - b).abs() < 1e-12));
    let x0 = g.nearest(&[0.7]);
    let mut well = vec![1e6; g.nodes()];
    well[x0] = 0.0;
    let q = inf_convolution(&well, 0.3, &d).unwrap();
    for i in 0..g.nodes() {
        assert!((q[i] - d.get(i, x0).unwrap().powi(2) / 0.6).abs() < 1e-9);
    }
    assert!(inf_convolution(&phi, 0.0, &d).is_err());
}

fn toy(seed: u64) -> (DistanceMatrix, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..10).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let rows = pts
        .iter()
        .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
        .collect();
    let mass = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..10).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    let a = mass(&mut rng);
    let b = mass(&mut rng);
    (DistanceMatrix::from_square(rows), a, b)
}

#[test]
fn monge_kantorovich_duality_on_toy_instances() {
    for seed in 0..10 {
        let (d, mu, nu) = toy(seed);
        let s = 0.7;
        let (w2, r) = wasserstein2(&d, &mu, &nu).unwrap();
        let value = w2 * w2 / (2.0 * s);
        // ψ = −u/(2s) from the source potentials of the cost d².
        let psi: Vec<f64> = r.u.iter().map(|u| -u / (2.0 * s)).collect();
        let q = inf_convolution(&psi, s, &d).unwrap();
        let dual = |psi: &[f64], q: &[f64]| {
            q.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>() - psi.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>()
        };
        assert!((dual(&psi, &q) - value).abs() <= 1e-6 * value, "{} vs {value}", dual(&psi, &q));
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for _ in 0..20 {
            let other: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = inf_convolution(&other, s, &d).unwrap();
            assert!(dual(&other, &q) <= value + 1e-12);
        }
    }
}

#[test]
fn sinkhorn_agrees_with_the_exact_solver_on_a_subsample() {
    let (g, d) = ou(0.1);
    let nodes: Vec<usize> = (0..g.nodes()).step_by(3).collect();
    let a: Vec<f64> = nodes.iter().map(|&i| g.mu()[i]).collect();
    let b: Vec<f64> = nodes.iter().map(|&i| g.mu()[i] * (0.6 * g.point(i)[0]).exp()).collect();
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let a: Vec<f64> = a.iter().map(|x| x / sa).collect();
    let b: Vec<f64> = b.iter().map(|x| x / sb).collect();
    let cost: Vec<f64> = nodes.iter().flat_map(|&i| nodes.iter().map(move |&j| (i, j))).map(|(i, j)| d.get(i, j).unwrap().powi(2)).collect();
    let exact = transport_simplex(&cost, &a, &b).unwrap();
    let ent = sinkhorn(&cost, &a, &b).unwrap();
    assert!(ent.plan.marginal_defect() <= 1e-8);
    assert!((ent.cost - exact.cost).abs() <= 0.05 * exact.cost, "{} vs {}", ent.cost, exact.cost);
}

fn mixture(rng: &mut ChaCha8Rng) -> impl Fn(&[f64]) -> f64 {
    let terms: Vec<(f64, f64, f64)> =
        (0..3).map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.3..1.2))).collect();
    move |p: &[f64]| terms.iter().map(|(w, c, s)| w * (-(p[0] - c).powi(2) / (2.0 * s * s) + p[0] * p[0] / 2.0).exp().min(1e8)).sum()
}

#[test]
fn entropy_wasserstein_on_random_densities() {
    let (g, d) = ou(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..20 {
        let f = normalize_density(&g, &g.sample(mixture(&mut rng)));
        let r = verify_entropy_wasserstein(&g, &f, &[0.25, 1.0], &ou_params(), &d, &format!("mixture-{k}")).unwrap();
        assert!(r.passed(), "{:?}", r.worst);
    }
}

#[test]
fn modified_hwi_on_random_densities() {
    let (g, d) = ou(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for k in 0..10 {
        let f = normalize_density(&g, &g.sample(mixture(&mut rng)));
        let r = verify_modified_hwi(&g, &f, 2.0, None, &ou_params(), &d, &format!("mixture-{k}")).unwrap();
        assert!(r.conclusion.passed(), "{:?}", r.conclusion.worst);
        assert!((r.horizon - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn w2_triangle_inequality(seed in 0u64..10_000) {
        let (d, mu, nu) = toy(seed);
        let (_, _, rho) = toy(seed + 1);
        let ab = wasserstein2(&d, &mu, &nu).unwrap().0;
        let bc = wasserstein2(&d, &nu, &rho).unwrap().0;
        let ac = wasserstein2(&d, &mu, &rho).unwrap().0;
        let ba = wasserstein2(&d, &nu, &mu).unwrap().0;
        prop_assert!(ac <= ab + bc + 1e-6);
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!(d.axiom_defect() <= 1e-9);
    }

    #[test]
    fn inf_convolution_semigroup_bound(seed in 0u64..10_000, s in 0.1..2.0f64, t in 0.1..2.0f64) {
        let (d, _, _) = toy(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let two = inf_convolution(&inf_convolution(&phi, t, &d).unwrap(), s, &d).unwrap();
        let one = inf_convolution(&phi, s + t, &d).unwrap();
        prop_assert!(two.iter().zip(&one).all(|(a, b)| *a >= b - 1e-12));
    }

    #[test]
    fn simplex_duality_gap(seed in 0u64..10_000) {
        let (d, mu, nu) = toy(seed);
        let r = wasserstein2(&d, &mu, &nu).unwrap().1;
        prop_assert!(r.duality_gap <= 1e-8);
        prop_assert!(r.plan.marginal_defect() <= 1e-8);
    }
}
