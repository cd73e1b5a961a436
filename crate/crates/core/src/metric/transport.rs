//! Quadratic-cost optimal transport between measures on a node set.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, MetricError};

/// Largest support on either side solved by the exact simplex.
pub const EXACT_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportMethod {
    NetworkSimplex,
    Sinkhorn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingPlan {
    /// Nonzero entries `(i, j, Π_ij)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub source: Vec<f64>,
    pub target: Vec<f64>,
}

impl CouplingPlan {
    /// Largest deviation of the plan's marginals from `source` and `target`.
    pub fn marginal_defect(&self) -> f64 {
        let mut rows = vec![0.0; self.source.len()];
        let mut cols = vec![0.0; self.target.len()];
        for &(i, j, v) in &self.entries {
            rows[i] += v;
            cols[j] += v;
        }
        let r = rows.iter().zip(&self.source).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = cols.iter().zip(&self.target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().map(|e| e.2).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub method: TransportMethod,
    /// `Σ c_ij Π_ij`.
    pub cost: f64,
    /// Dual objective `Σ a_i u_i + Σ b_j v_j`.
    pub dual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub plan: CouplingPlan,
    /// Dual potentials on the source and target sides.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

fn check_marginals(a: &[f64], b: &[f64]) -> Result<(), MetricError> {
    if let Some(x) = a.iter().chain(b).find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(MetricError::Marginal(format!("negative or non-finite mass {x}")));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(1e-300) || sa == 0.0 {
        return Err(MetricError::Marginal(format!("totals differ: {sa} vs {sb}")));
    }
    Ok(())
}

/// Exact transportation simplex (MODI pricing on the basis tree) for the
/// dense `m × n` cost `cost[i*n + j]`.
pub fn transport_simplex(cost: &[f64], a: &[f64], b: &[f64]) -> Result<TransportResult, MetricError> {
    check_marginals(a, b)?;
    let (m_all, n_all) = (a.len(), b.len());
    assert_eq!(cost.len(), m_all * n_all);
    let rows: Vec<usize> = (0..m_all).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n_all).filter(|&j| b[j] > 0.0).collect();
    let (m, n) = (rows.len(), cols.len());
    let c = |i: usize, j: usize| cost[rows[i] * n_all + cols[j]];
    let cmax = rows.iter().flat_map(|&i| cols.iter().map(move |&j| cost[i * n_all + j].abs())).fold(0.0, f64::max);
    let eps = 1e-12 * cmax.max(1e-300);

    // North-west corner start: m + n − 1 cells forming a spanning tree.
    let mut ra: Vec<f64> = rows.iter().map(|&i| a[i]).collect();
    let mut rb: Vec<f64> = cols.iter().map(|&j| b[j]).collect();
    let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]);
        basis.push((i, j, x));
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }

    let node_count = m + n;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    let mut iterations = 0;
    let cap = 50 * (m + n) * (m + n).max(10);
    loop {
        for l in adj.iter_mut() {
            l.clear();
        }
        for (k, &(bi, bj, _)) in basis.iter().enumerate() {
            adj[bi].push(k);
            adj[m + bj].push(k);
        }
        // Potentials by traversal from row 0; parent edge of each tree node.
        let mut seen = vec![false; node_count];
        let mut parent = vec![usize::MAX; node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &k in &adj[node] {
                let (bi, bj, _) = basis[k];
                let other = if node < m { m + bj } else { bi };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = k;
                    if other < m {
                        u[bi] = c(bi, bj) - v[bj];
                    } else {
                        v[bj] = c(bi, bj) - u[bi];
                    }
                    queue.push_back(other);
                }
            }
        }
        debug_assert!(seen.iter().all(|s| *s));

        let mut best = (-eps, usize::MAX, usize::MAX);
        for ii in 0..m {
            for jj in 0..n {
                let r = c(ii, jj) - u[ii] - v[jj];
                if r < best.0 {
                    best = (r, ii, jj);
                }
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        iterations += 1;
        if iterations > cap {
            return Err(MetricError::NoConvergence(format!("transport simplex exceeded {cap} pivots")));
        }
        let (ei, ej) = (best.1, best.2);
        // Tree path from column ej up to the root and from row ei up to the root.
        let path_to_root = |mut node: usize| {
            let mut p = vec![node];
            while parent[node] != usize::MAX {
                let (bi, bj, _) = basis[parent[node]];
                node = if node < m { m + bj } else { bi };
                p.push(node);
            }
            p
        };
        let pj = path_to_root(m + ej);
        let pi = path_to_root(ei);
        let mut common = 0;
        while common < pj.len().min(pi.len()) && pj[pj.len() - 1 - common] == pi[pi.len() - 1 - common] {
            common += 1;
        }
        // Cycle: ei → (entering) → ej → … → lca → … → ei. Edges along the walk
        // from ej alternate −, +, −, …
        let mut cycle_edges: Vec<usize> = Vec::new();
        for &node in &pj[..pj.len() - common] {
            cycle_edges.push(parent[node]);
        }
        let mut down: Vec<usize> = pi[..pi.len() - common].iter().map(|&node| parent[node]).collect();
        down.reverse();
        cycle_edges.extend(down);
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in cycle_edges.iter().enumerate() {
            if pos % 2 == 0 && basis[k].2 < theta {
                theta = basis[k].2;
                leave = k;
            }
        }
        for (pos, &k) in cycle_edges.iter().enumerate() {
            if pos % 2 == 0 {
                basis[k].2 -= theta;
            } else {
                basis[k].2 += theta;
            }
        }
        basis[leave] = (ei, ej, theta);
    }

    let primal: f64 = basis.iter().map(|&(bi, bj, x)| c(bi, bj) * x).sum();
    let mut u_full = vec![0.0; m_all];
    let mut v_full = vec![0.0; n_all];
    for (k, &i) in rows.iter().enumerate() {
        u_full[i] = u[k];
    }
    for (k, &j) in cols.iter().enumerate() {
        v_full[j] = v[k];
    }
    // Zero-mass nodes get the largest feasible potential.
    for i in (0..m_all).filter(|i| a[*i] == 0.0) {
        u_full[i] = cols.iter().map(|&j| cost[i * n_all + j] - v_full[j]).fold(f64::INFINITY, f64::min);
    }
    for j in (0..n_all).filter(|j| b[*j] == 0.0) {
        v_full[j] = (0..m_all).map(|i| cost[i * n_all + j] - u_full[i]).fold(f64::INFINITY, f64::min);
    }
    let dual: f64 = a.iter().zip(&u_full).map(|(x, y)| x * y).sum::<f64>()
        + b.iter().zip(&v_full).map(|(x, y)| x * y).sum::<f64>();
    let entries =
        basis.iter().filter(|e| e.2 > 0.0).map(|&(bi, bj, x)| (rows[bi], cols[bj], x)).collect::<Vec<_>>();
    Ok(TransportResult {
        method: TransportMethod::NetworkSimplex,
        cost: primal,
        dual,
        duality_gap: (primal - dual).abs() / primal.abs().max(1e-300),
        iterations,
        plan: CouplingPlan { entries, source: a.to_vec(), target: b.to_vec() },
        u: u_full,
        v: v_full,
    })
}

fn logsumexp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Log-domain Sinkhorn with ε-scaling down to `10⁻³·median(cost)`.
pub fn sinkhorn(cost: &[f64], a: &[f64], b: &[f64]) -> Result<TransportResult, MetricError> {
    check_marginals(a, b)?;
    let (m, n) = (a.len(), b.len());
    let la: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut sorted: Vec<f64> = cost.iter().copied().filter(|c| *c > 0.0).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(1.0);
    let target = 1e-3 * median;
    let mut eps = sorted.last().copied().unwrap_or(1.0).max(target);
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    loop {
        for _ in 0..5000 {
            iterations += 1;
            for i in 0..m {
                if a[i] > 0.0 {
                    f[i] = eps * la[i] - eps * logsumexp((0..n).map(|j| (g[j] - cost[i * n + j]) / eps));
                }
            }
            let mut err: f64 = 0.0;
            for j in 0..n {
                if b[j] > 0.0 {
                    g[j] = eps * lb[j] - eps * logsumexp((0..m).map(|i| (f[i] - cost[i * n + j]) / eps));
                }
            }
            for i in (0..m).filter(|i| a[*i] > 0.0) {
                let row = logsumexp((0..n).map(|j| (f[i] + g[j] - cost[i * n + j]) / eps)).exp();
                err = err.max((row - a[i]).abs());
            }
            if err < 1e-10 {
                break;
            }
        }
        if eps <= target {
            break;
        }
        eps = (eps * 0.5).max(target);
    }
    let mut plan = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            if a[i] > 0.0 && b[j] > 0.0 {
                plan[i * n + j] = ((f[i] + g[j] - cost[i * n + j]) / eps).exp();
            }
        }
    }
    round_to_marginals(&mut plan, a, b);
    let mut entries = Vec::new();
    let mut primal = 0.0;
    for i in 0..m {
        for j in 0..n {
            let p = plan[i * n + j];
            if p > 0.0 {
                entries.push((i, j, p));
                primal += p * cost[i * n + j];
            }
        }
    }
    let dual: f64 = a.iter().zip(&f).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>();
    Ok(TransportResult {
        method: TransportMethod::Sinkhorn,
        cost: primal,
        dual,
        duality_gap: (primal - dual).abs() / primal.abs().max(1e-300),
        iterations,
        plan: CouplingPlan { entries, source: a.to_vec(), target: b.to_vec() },
        u: f,
        v: g,
    })
}

/// Project a nonnegative plan onto the couplings of `a` and `b`: shrink
/// overfull rows and columns, then spread the remaining deficit as a product.
fn round_to_marginals(plan: &mut [f64], a: &[f64], b: &[f64]) {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let r: f64 = plan[i * n..(i + 1) * n].iter().sum();
        if r > a[i] {
            plan[i * n..(i + 1) * n].iter_mut().for_each(|p| *p *= a[i] / r);
        }
    }
    for j in 0..n {
        let c: f64 = (0..m).map(|i| plan[i * n + j]).sum();
        if c > b[j] {
            (0..m).for_each(|i| plan[i * n + j] *= b[j] / c);
        }
    }
    let da: Vec<f64> = (0..m).map(|i| (a[i] - plan[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0)).collect();
    let db: Vec<f64> = (0..n).map(|j| (b[j] - (0..m).map(|i| plan[i * n + j]).sum::<f64>()).max(0.0)).collect();
    let total: f64 = da.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            for j in 0..n {
                plan[i * n + j] += da[i] * db[j] / total;
            }
        }
    }
}

/// Squared-distance cost restricted to the supports of `mu` and `nu`, with the index maps.
fn support_cost(dist: &DistanceMatrix, mu: &[f64], nu: &[f64]) -> Result<(Vec<usize>, Vec<usize>, Vec<f64>), MetricError> {
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.len()).filter(|&j| nu[j] > 0.0).collect();
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            let d = dist.get(i, j).ok_or(MetricError::MissingDistance { from: i, to: j })?;
            cost.push(d * d);
        }
    }
    Ok((rows, cols, cost))
}

/// `W₂(μ, ν)` with the exact simplex when both supports are at most
/// [`EXACT_LIMIT`], entropic otherwise.
pub fn wasserstein2(dist: &DistanceMatrix, mu: &[f64], nu: &[f64]) -> Result<(f64, TransportResult), MetricError> {
    let method = if mu.iter().filter(|x| **x > 0.0).count() <= EXACT_LIMIT
        && nu.iter().filter(|x| **x > 0.0).count() <= EXACT_LIMIT
    {
        TransportMethod::NetworkSimplex
    } else {
        TransportMethod::Sinkhorn
    };
    wasserstein2_with(dist, mu, nu, method)
}

pub fn wasserstein2_with(
    dist: &DistanceMatrix,
    mu: &[f64],
    nu: &[f64],
    method: TransportMethod,
) -> Result<(f64, TransportResult), MetricError> {
    if mu.len() != dist.nodes() || nu.len() != dist.nodes() {
        return Err(MetricError::Marginal("measure length differs from node count".into()));
    }
    check_marginals(mu, nu)?;
    let (rows, cols, cost) = support_cost(dist, mu, nu)?;
    let a: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| nu[j]).collect();
    let mut r = match method {
        TransportMethod::NetworkSimplex => transport_simplex(&cost, &a, &b)?,
        TransportMethod::Sinkhorn => sinkhorn(&cost, &a, &b)?,
    };
    for e in r.plan.entries.iter_mut() {
        *e = (rows[e.0], cols[e.1], e.2);
    }
    r.plan.source = mu.to_vec();
    r.plan.target = nu.to_vec();
    let mut u = vec![f64::NAN; mu.len()];
    let mut v = vec![f64::NAN; nu.len()];
    for (k, &i) in rows.iter().enumerate() {
        u[i] = r.u[k];
    }
    for (k, &j) in cols.iter().enumerate() {
        v[j] = r.v[k];
    }
    r.u = u;
    r.v = v;
    Ok((r.cost.max(0.0).sqrt(), r))
}

/// `Q_s φ(x) = min_y { φ(y) + d(x, y)²/(2s) }` over every node.
pub fn inf_convolution(phi: &[f64], s: f64, dist: &DistanceMatrix) -> Result<Vec<f64>, MetricError> {
    if !(s > 0.0) {
        return Err(MetricError::Marginal(format!("inf-convolution time must be positive, got {s}")));
    }
    (0..phi.len())
        .map(|x| {
            let row = dist.row(x).ok_or(MetricError::MissingDistance { from: x, to: x })?;
            Ok(phi.iter().zip(row).map(|(p, d)| p + d * d / (2.0 * s)).fold(f64::INFINITY, f64::min))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, m: usize, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        a.iter_mut().for_each(|x| *x /= sa);
        b.iter_mut().for_each(|x| *x /= sb);
        let cost = (0..m * n).map(|_| rng.gen_range(0.0..4.0)).collect();
        (cost, a, b)
    }

    /// Every permutation of a 4×4 assignment; the LP optimum is attained at one.
    #[test]
    fn simplex_matches_assignment_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let cost: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..5.0)).collect();
            let a = vec![0.25; 4];
            let r = transport_simplex(&cost, &a, &a).unwrap();
            let mut best = f64::INFINITY;
            let mut perm = [0, 1, 2, 3];
            permute(&mut perm, 0, &mut |p| {
                best = best.min(p.iter().enumerate().map(|(i, &j)| cost[i * 4 + j]).sum::<f64>() / 4.0);
            });
            assert!((r.cost - best).abs() < 1e-12, "{} vs {best}", r.cost);
        }
    }

    fn permute(p: &mut [usize; 4], k: usize, visit: &mut impl FnMut(&[usize; 4])) {
        if k == 4 {
            visit(p);
            return;
        }
        for i in k..4 {
            p.swap(k, i);
            permute(p, k + 1, visit);
            p.swap(k, i);
        }
    }

    #[test]
    fn simplex_plan_and_duality() {
        for seed in 0..10 {
            let (cost, a, b) = random_instance(seed, 12, 9);
            let r = transport_simplex(&cost, &a, &b).unwrap();
            assert!(r.plan.marginal_defect() < 1e-12);
            assert!(r.plan.min_entry() >= 0.0);
            assert!(r.duality_gap < 1e-10);
            for i in 0..12 {
                for j in 0..9 {
                    assert!(cost[i * 9 + j] - r.u[i] - r.v[j] >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn sinkhorn_approaches_the_exact_value() {
        let (cost, a, b) = random_instance(5, 15, 15);
        let exact = transport_simplex(&cost, &a, &b).unwrap();
        let ent = sinkhorn(&cost, &a, &b).unwrap();
        assert!(ent.plan.marginal_defect() < 1e-8);
        assert!(ent.cost >= exact.cost - 1e-9);
        assert!((ent.cost - exact.cost).abs() < 2e-2 * exact.cost, "{} vs {}", ent.cost, exact.cost);
    }

    #[test]
    fn mismatched_marginals_are_rejected() {
        let cost = vec![0.0; 4];
        assert!(matches!(transport_simplex(&cost, &[0.5, 0.5], &[0.5, 0.6]), Err(MetricError::Marginal(_))));
    }
}
