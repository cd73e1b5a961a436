//! Flow-lattice discretization of a diffusion operator.
//!
//! Each horizontal field `X_i` generates two jumps `x ↦ x ± h·X_i(x)`. The
//! builtin frames have coefficients constant along their own flow lines
//! (`X_i(X_i^k) = 0`), so these jumps follow the exact flow and land on a
//! lattice whose spacing along axis `k` is `h^{1+D_k}/q_k`, where `D_k` is the
//! coefficient degree and `q_k` the coefficient denominators.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::sparse::Csr;
use super::HeatError;
use crate::models::ModelDescriptor;
use crate::symbolic::{rat_to_f64, DiffusionOperator, NumericPoly};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    ZeroFlux,
    Periodic,
    TruncatedGaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    /// Last node for non-periodic axes; the identified endpoint for periodic ones.
    pub max: f64,
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub h: f64,
    pub boundary: Boundary,
    pub axes: Vec<AxisSpec>,
}

impl GridSpec {
    /// Flow-lattice spacings for `op` at step `h` on the box `extents`.
    pub fn for_operator(
        op: &DiffusionOperator,
        h: f64,
        extents: &[(f64, f64)],
        boundary: Boundary,
    ) -> Result<Self, HeatError> {
        if !(h > 0.0) {
            return Err(HeatError::GridSpec(format!("step h = {h} must be positive")));
        }
        if extents.len() != op.arity() {
            return Err(HeatError::GridSpec(format!(
                "{} extents given for {} coordinates",
                extents.len(),
                op.arity()
            )));
        }
        let mut axes = Vec::with_capacity(op.arity());
        for (k, &(min, max)) in extents.iter().enumerate() {
            let mut degree = 0u32;
            let mut denom = num_bigint::BigInt::one();
            for x in op.horizontal() {
                let c = &x.coefficients()[k];
                for (m, coeff) in c.terms() {
                    degree = degree.max(m.degree());
                    denom = denom.lcm(coeff.denom());
                }
            }
            let q = denom.abs().to_f64().unwrap_or(1.0);
            axes.push(AxisSpec { min, max, spacing: h.powi(1 + degree as i32) / q });
        }
        Ok(GridSpec { h, boundary, axes })
    }

    /// Same box with the step scaled by `factor`.
    pub fn rescaled(&self, op: &DiffusionOperator, factor: f64) -> Result<Self, HeatError> {
        let extents: Vec<(f64, f64)> = self.axes.iter().map(|a| (a.min, a.max)).collect();
        GridSpec::for_operator(op, self.h * factor, &extents, self.boundary)
    }

    /// The rerun grid with twice the step.
    pub fn half_resolution(&self, op: &DiffusionOperator) -> Result<Self, HeatError> {
        self.rescaled(op, 2.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub spacing: f64,
    pub count: usize,
    pub periodic: bool,
}

impl Axis {
    fn new(spec: &AxisSpec, periodic: bool, k: usize) -> Result<Self, HeatError> {
        if !(spec.spacing > 0.0) || !(spec.max > spec.min) {
            return Err(HeatError::GridSpec(format!("axis {k}: bad extent or spacing")));
        }
        let cells = (spec.max - spec.min) / spec.spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-6 {
            return Err(HeatError::GridSpec(format!(
                "axis {k}: length {} is not a multiple of spacing {}",
                spec.max - spec.min,
                spec.spacing
            )));
        }
        let count = if periodic { rounded as usize } else { rounded as usize + 1 };
        if count < 8 {
            return Err(HeatError::TooCoarse { axis: k, count });
        }
        Ok(Axis { min: spec.min, spacing: spec.spacing, count, periodic })
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing
    }

    /// Lattice index of `t`, `Ok(None)` when outside a non-periodic axis, and an
    /// error when `t` falls between nodes.
    fn locate(&self, t: f64) -> Result<Option<usize>, ()> {
        let u = (t - self.min) / self.spacing;
        let r = u.round();
        if (u - r).abs() > 1e-9 {
            return Err(());
        }
        let r = r as i64;
        let n = self.count as i64;
        if self.periodic {
            Ok(Some(r.rem_euclid(n) as usize))
        } else if (0..n).contains(&r) {
            Ok(Some(r as usize))
        } else {
            Ok(None)
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridModel {
    pub name: String,
    spec: GridSpec,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    points: Vec<f64>,
    mu: Vec<f64>,
    probability: bool,
    generator: Csr,
    /// Per horizontal field, per node: `[plus, minus]` jump targets.
    horizontal: Vec<Vec<[u32; 2]>>,
    /// Per vertical field: constant coefficients along each axis.
    vertical: Vec<Vec<f64>>,
    component: Vec<usize>,
    component_count: usize,
    /// Per axis: index step of vertical differences, the smallest translation
    /// that stays inside a jump component.
    vertical_steps: Vec<usize>,
}

/// Assemble the jump generator of `model` on `spec`.
pub fn discretize(model: &ModelDescriptor, spec: &GridSpec) -> Result<GridModel, HeatError> {
    let op = &model.operator;
    let n = op.arity();
    if spec.axes.len() != n {
        return Err(HeatError::GridSpec(format!("{} axes for {} coordinates", spec.axes.len(), n)));
    }
    let periodic = spec.boundary == Boundary::Periodic;
    let axes: Vec<Axis> = spec.axes.iter().enumerate().map(|(k, a)| Axis::new(a, periodic, k)).collect::<Result<_, _>>()?;
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * axes[k + 1].count;
    }
    let nodes = strides[0] * axes[0].count;
    let mut points = Vec::with_capacity(nodes * n);
    for i in 0..nodes {
        for k in 0..n {
            points.push(axes[k].coordinate((i / strides[k]) % axes[k].count));
        }
    }

    for (i, x) in op.horizontal().iter().enumerate() {
        for c in x.coefficients() {
            if !x.apply(c)?.is_zero() {
                return Err(HeatError::NonLinearFlow { field: i });
            }
        }
    }
    let mut vertical = Vec::new();
    for (j, z) in op.vertical().iter().enumerate() {
        if !z.coefficients().iter().all(|c| c.is_constant()) {
            return Err(HeatError::UnsupportedVertical { field: j });
        }
        vertical.push(z.coefficients().iter().map(|c| rat_to_f64(&c.constant_term())).collect());
    }

    let potential = op.potential().to_numeric();
    let v: Vec<f64> = (0..nodes).map(|i| potential.eval(&points[i * n..(i + 1) * n])).collect();
    let fields: Vec<Vec<NumericPoly>> =
        op.horizontal().iter().map(|x| x.coefficients().iter().map(|c| c.to_numeric()).collect()).collect();

    let h = spec.h;
    let locate = |p: &[f64], dir: &[f64], s: f64| -> Result<Option<usize>, usize> {
        let mut idx = 0;
        for k in 0..n {
            match axes[k].locate(p[k] + s * h * dir[k]) {
                Ok(Some(j)) => idx += j * strides[k],
                Ok(None) => return Ok(None),
                Err(()) => return Err(k),
            }
        }
        Ok(Some(idx))
    };

    let mut horizontal = vec![vec![[NONE; 2]; nodes]; fields.len()];
    let mut rows = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let p = &points[i * n..(i + 1) * n];
        let mut row = Vec::with_capacity(2 * fields.len() + 1);
        for (fi, field) in fields.iter().enumerate() {
            let dir: Vec<f64> = field.iter().map(|c| c.eval(p)).collect();
            if dir.iter().all(|c| *c == 0.0) {
                continue;
            }
            for (side, s) in [1.0, -1.0].into_iter().enumerate() {
                let target = locate(p, &dir, s).map_err(|axis| HeatError::LatticeNotClosed {
                    field: fi,
                    node: i,
                    axis,
                })?;
                if let Some(j) = target {
                    if j != i {
                        horizontal[fi][i][side] = j as u32;
                        row.push((j, (-(v[j] - v[i]) / 2.0).exp() / (h * h)));
                    }
                }
            }
        }
        let out: f64 = row.iter().map(|e| e.1).sum();
        row.push((i, -out));
        rows.push(row);
    }
    let generator = Csr::from_rows(rows);

    let cell: f64 = axes.iter().map(|a| a.spacing).product();
    let mut mu: Vec<f64> = v.iter().map(|vi| (-vi).exp() * cell).collect();
    let probability = model.finite_measure || spec.boundary != Boundary::ZeroFlux;
    if probability {
        let total: f64 = mu.iter().sum();
        mu.iter_mut().for_each(|m| *m /= total);
    }
    check_invariants(&generator, &mu)?;
    let component = super::spectral::components(&generator);
    let component_count = component.iter().max().map_or(0, |m| m + 1);
    let centre: usize = (0..n).map(|k| (axes[k].count / 2) * strides[k]).sum();
    let vertical_steps = (0..n)
        .map(|k| {
            (1..axes[k].count / 2)
                .find(|m| component[centre + m * strides[k]] == component[centre])
                .unwrap_or(1)
        })
        .collect();
    Ok(GridModel {
        name: model.name.clone(),
        spec: spec.clone(),
        axes,
        strides,
        points,
        mu,
        probability,
        generator,
        horizontal,
        vertical,
        component,
        component_count,
        vertical_steps,
    })
}

/// Conservativeness, detailed balance and off-diagonal positivity of `g`.
pub fn check_invariants(g: &Csr, mu: &[f64]) -> Result<(), HeatError> {
    let mut offending = Vec::new();
    for i in 0..g.dim() {
        let mut sum = 0.0;
        let mut scale: f64 = 1.0;
        for (j, gij) in g.row(i) {
            sum += gij;
            scale = scale.max(gij.abs());
            if j != i {
                if gij < 0.0 {
                    offending.push(format!("G[{i},{j}] = {gij:e} < 0"));
                }
                let lhs = mu[i] * gij;
                let rhs = mu[j] * g.get(j, i);
                if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
                    offending.push(format!("mu[{i}]G[{i},{j}] = {lhs:e} but mu[{j}]G[{j},{i}] = {rhs:e}"));
                }
            }
        }
        if sum.abs() > 1e-12 * scale {
            offending.push(format!("row {i} sums to {sum:e}"));
        }
        if offending.len() >= 8 {
            break;
        }
    }
    if offending.is_empty() {
        Ok(())
    } else {
        Err(HeatError::Invariant(offending.join("; ")))
    }
}

impl GridModel {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn nodes(&self) -> usize {
        self.mu.len()
    }

    pub fn arity(&self) -> usize {
        self.axes.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let n = self.arity();
        &self.points[i * n..(i + 1) * n]
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Whether `μ` was normalized to total mass one.
    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn generator(&self) -> &Csr {
        &self.generator
    }

    /// Jump-graph component of node `i`. Flow lattices of step-2 groups can
    /// split into interleaved sublattices.
    pub fn component(&self, i: usize) -> usize {
        self.component[i]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn has_vertical(&self) -> bool {
        !self.vertical.is_empty()
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.axes[axis].count
    }

    /// Node nearest to `p`.
    pub fn nearest(&self, p: &[f64]) -> usize {
        let coords: Vec<usize> = self
            .axes
            .iter()
            .zip(p)
            .map(|(a, &x)| (((x - a.min) / a.spacing).round().max(0.0) as usize).min(a.count - 1))
            .collect();
        self.index_of(&coords)
    }

    /// Nodes whose every coordinate index lies in the central `fraction` of its axis.
    pub fn interior(&self, fraction: f64) -> Vec<usize> {
        if self.spec.boundary == Boundary::Periodic {
            return (0..self.nodes()).collect();
        }
        (0..self.nodes())
            .filter(|&i| {
                self.axes.iter().enumerate().all(|(k, a)| {
                    let c = (a.count - 1) as f64 / 2.0;
                    (self.axis_index(i, k) as f64 - c).abs() <= fraction * c + 1e-9
                })
            })
            .collect()
    }

    /// Evaluate `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.nodes()).map(|i| f(self.point(i))).collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mu).map(|(a, m)| a * m).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Difference quotient along horizontal field `field`: central in the
    /// interior, one-sided where a jump leaves the grid.
    pub fn horizontal_difference(&self, field: usize, f: &[f64], i: usize) -> f64 {
        let h = self.spec.h;
        let [p, m] = self.horizontal[field][i];
        match (p != NONE, m != NONE) {
            (true, true) => (f[p as usize] - f[m as usize]) / (2.0 * h),
            (true, false) => (f[p as usize] - f[i]) / h,
            (false, true) => (f[i] - f[m as usize]) / h,
            (false, false) => 0.0,
        }
    }

    fn axis_difference(&self, axis: usize, f: &[f64], i: usize) -> f64 {
        let a = &self.axes[axis];
        let s = self.strides[axis];
        let m = self.vertical_steps[axis];
        let c = self.axis_index(i, axis);
        let base = i - c * s;
        let (lo, hi) = if a.periodic {
            ((c + a.count - m % a.count) % a.count, (c + m) % a.count)
        } else {
            (if c >= m { c - m } else { c }, if c + m < a.count { c + m } else { c })
        };
        let span = if a.periodic { 2 * m } else { hi - lo };
        if span == 0 {
            return 0.0;
        }
        (f[base + hi * s] - f[base + lo * s]) / (span as f64 * a.spacing)
    }

    /// `D^Z_j f` at node `i`.
    pub fn vertical_difference(&self, field: usize, f: &[f64], i: usize) -> f64 {
        self.vertical[field]
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| c * self.axis_difference(k, f, i))
            .sum()
    }

    /// `Γ_h(f) = Σ_i (D_i f)²` nodewise.
    pub fn gamma(&self, f: &[f64]) -> Vec<f64> {
        (0..self.nodes())
            .map(|i| (0..self.horizontal.len()).map(|k| self.horizontal_difference(k, f, i).powi(2)).sum())
            .collect()
    }

    /// `Γ^Z_h(f) = Σ_j (D^Z_j f)²` nodewise.
    pub fn gamma_z(&self, f: &[f64]) -> Vec<f64> {
        (0..self.nodes())
            .map(|i| (0..self.vertical.len()).map(|k| self.vertical_difference(k, f, i).powi(2)).sum())
            .collect()
    }

    /// Carré du champ of the jump process, `½ Σ_y G_xy (f(y) − f(x))²`.
    pub fn chain_gamma(&self, f: &[f64]) -> Vec<f64> {
        chain_gamma(&self.generator, f)
    }

    /// Dirichlet form `−⟨f, Gf⟩_μ`, the discrete `∫Γ(f)dμ`.
    pub fn dirichlet(&self, f: &[f64]) -> f64 {
        self.integrate(&self.chain_gamma(f))
    }

    /// Jump graph with edge lengths `h`, for graph distances.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.horizontal
            .iter()
            .flat_map(|field| field.iter().enumerate().flat_map(|(i, pm)| pm.iter().filter(|j| **j != NONE).map(move |&j| (i, j as usize))))
    }
}

pub fn chain_gamma(g: &Csr, f: &[f64]) -> Vec<f64> {
    (0..g.dim())
        .map(|i| 0.5 * g.row(i).filter(|(j, _)| *j != i).map(|(j, gij)| gij * (f[j] - f[i]).powi(2)).sum::<f64>())
        .collect()
}
