//! Semigroup inequalities evaluated on a grid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::battery::TestFunction;
use super::functionals::{entropy, floor_eps, lp_norm, variance};
use super::grid::GridModel;
use super::propagate::Semigroup;
use super::HeatError;
use crate::metric::component_distance;
use crate::params::CDParams;
use crate::report::{tolerance, CheckWitness, Constant, Evaluation, InequalityReport, Reducer, Verdict, TOL_FLOOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InequalityId {
    GradLog,
    Grad,
    GradAlpha,
    Poincare,
    MlsiVertical,
    RevLsi,
    RevPoincare,
    RegBound,
    WangHarnack,
    LogHarnack,
    KernelLower,
    Lsi,
    Hypercontract,
    L1Smoothing,
    LsiDimConst,
}

impl InequalityId {
    pub const ALL: [InequalityId; 15] = [
        InequalityId::GradLog,
        InequalityId::Grad,
        InequalityId::GradAlpha,
        InequalityId::Poincare,
        InequalityId::MlsiVertical,
        InequalityId::RevLsi,
        InequalityId::RevPoincare,
        InequalityId::RegBound,
        InequalityId::WangHarnack,
        InequalityId::LogHarnack,
        InequalityId::KernelLower,
        InequalityId::Lsi,
        InequalityId::Hypercontract,
        InequalityId::L1Smoothing,
        InequalityId::LsiDimConst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::GradLog => "GRAD_LOG",
            InequalityId::Grad => "GRAD",
            InequalityId::GradAlpha => "GRAD_ALPHA",
            InequalityId::Poincare => "POINCARE",
            InequalityId::MlsiVertical => "MLSI_VERTICAL",
            InequalityId::RevLsi => "REV_LSI",
            InequalityId::RevPoincare => "REV_POINCARE",
            InequalityId::RegBound => "REG_BOUND",
            InequalityId::WangHarnack => "WANG_HARNACK",
            InequalityId::LogHarnack => "LOG_HARNACK",
            InequalityId::KernelLower => "KERNEL_LOWER",
            InequalityId::Lsi => "LSI",
            InequalityId::Hypercontract => "HYPERCONTRACT",
            InequalityId::L1Smoothing => "L1_SMOOTHING",
            InequalityId::LsiDimConst => "LSI_DIM_CONST",
        }
    }

    pub fn needs_positive_rho1(self) -> bool {
        matches!(
            self,
            InequalityId::GradLog
                | InequalityId::Grad
                | InequalityId::Poincare
                | InequalityId::MlsiVertical
                | InequalityId::LsiDimConst
        )
    }

    pub fn needs_probability(self) -> bool {
        matches!(
            self,
            InequalityId::Poincare
                | InequalityId::MlsiVertical
                | InequalityId::KernelLower
                | InequalityId::Lsi
                | InequalityId::Hypercontract
                | InequalityId::LsiDimConst
        )
    }

    pub fn needs_pairs(self) -> bool {
        matches!(self, InequalityId::WangHarnack | InequalityId::LogHarnack | InequalityId::KernelLower)
    }

    pub fn needs_rho0(self) -> bool {
        matches!(self, InequalityId::Lsi | InequalityId::Hypercontract)
    }

    pub fn uses_time(self) -> bool {
        !matches!(
            self,
            InequalityId::Poincare | InequalityId::MlsiVertical | InequalityId::Lsi | InequalityId::LsiDimConst
        )
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown inequality id {0:?}")]
pub struct UnknownId(pub String);

impl FromStr for InequalityId {
    type Err = UnknownId;
    fn from_str(s: &str) -> Result<Self, UnknownId> {
        InequalityId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| UnknownId(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSelection {
    All,
    /// Nodes in the central fraction of every axis.
    Interior(f64),
    /// Nodes nearest to the given points.
    Points(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelection {
    None,
    /// Every ordered pair of selected nodes.
    AllNodes,
    /// `sources` seeded random selected nodes, each paired with every selected node.
    Sampled { sources: usize },
    /// Nearest nodes to explicit point pairs.
    Points(Vec<(Vec<f64>, Vec<f64>)>),
}

#[derive(Clone, Debug)]
pub struct CheckInputs {
    pub functions: Vec<TestFunction>,
    pub nodes: NodeSelection,
    pub pairs: PairSelection,
    /// Exponents `α > 1` of the Wang inequality.
    pub alphas: Vec<f64>,
    /// Exponents `p > 1` of the hypercontractivity check.
    pub exponents: Vec<f64>,
    pub rho0: Option<f64>,
    pub seed: u64,
}

impl CheckInputs {
    pub fn new(functions: Vec<TestFunction>) -> Self {
        CheckInputs {
            functions,
            nodes: NodeSelection::All,
            pairs: PairSelection::None,
            alphas: vec![2.0],
            exponents: vec![1.5, 2.0, 4.0],
            rho0: None,
            seed: 0,
        }
    }
}

struct Resolved {
    values: Vec<Vec<f64>>,
    nodes: Vec<usize>,
    /// `(x, y, d(x, y))`, restricted to pairs in a common jump component.
    pairs: Vec<(usize, usize, f64)>,
    dropped_pairs: usize,
}

fn resolve(grid: &GridModel, inputs: &CheckInputs, want_pairs: bool) -> Resolved {
    let values = inputs.functions.iter().map(|f| f.sample(grid)).collect();
    let nodes: Vec<usize> = match &inputs.nodes {
        NodeSelection::All => (0..grid.nodes()).collect(),
        NodeSelection::Interior(frac) => grid.interior(*frac),
        NodeSelection::Points(ps) => ps.iter().map(|p| grid.nearest(p)).collect(),
    };
    let mut raw: Vec<(usize, usize)> = Vec::new();
    if want_pairs {
        match &inputs.pairs {
            PairSelection::None => {}
            PairSelection::AllNodes => {
                for &x in &nodes {
                    raw.extend(nodes.iter().map(|&y| (x, y)));
                }
            }
            PairSelection::Sampled { sources } => {
                let mut rng = ChaCha8Rng::seed_from_u64(inputs.seed);
                let chosen: Vec<usize> = nodes.choose_multiple(&mut rng, *sources).copied().collect();
                for x in chosen {
                    raw.extend(nodes.iter().map(|&y| (x, y)));
                }
            }
            PairSelection::Points(ps) => {
                raw.extend(ps.iter().map(|(a, b)| (grid.nearest(a), grid.nearest(b))));
            }
        }
    }
    let mut sources: Vec<usize> = raw.iter().map(|p| p.0).collect();
    sources.sort_unstable();
    sources.dedup();
    let dist = component_distance(grid, &sources);
    let mut pairs = Vec::with_capacity(raw.len());
    let mut dropped_pairs = 0;
    for (x, y) in raw {
        let d = dist.get(x, y).unwrap();
        if d.is_finite() {
            pairs.push((x, y, d));
        } else {
            dropped_pairs += 1;
        }
    }
    Resolved { values, nodes, pairs, dropped_pairs }
}

/// `C = 3(ρ₂+κ)/(ρ₁ρ₂) · (1 + Φ((d/2)(1 + 3κ/(2ρ₂))))`, `Φ(x) = (1+x)ln(1+x) − x ln x`.
pub fn lsi_dim_constant(params: &CDParams) -> f64 {
    let (r1, r2, k, d) = (params.rho1(), params.rho2(), params.kappa(), params.d());
    if r1 <= 0.0 || d.is_infinite() {
        return f64::INFINITY;
    }
    let x = d / 2.0 * (1.0 + 3.0 * k / (2.0 * r2));
    let phi = (1.0 + x) * (1.0 + x).ln() - if x > 0.0 { x * x.ln() } else { 0.0 };
    3.0 * (r2 + k) / (r1 * r2) * (1.0 + phi)
}

fn ln_vec(f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| v.ln()).collect()
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

struct Ctx<'a> {
    grid: &'a GridModel,
    sg: Semigroup<'a>,
    times: &'a [f64],
    nodes: &'a [usize],
    pairs: &'a [(usize, usize, f64)],
    params: &'a CDParams,
    inputs: &'a CheckInputs,
    h: f64,
}

impl Ctx<'_> {
    fn pt(&self, f: &[f64]) -> Result<Vec<Vec<f64>>, HeatError> {
        self.sg.apply_times(f, self.times)
    }

    fn eval(&self, function: usize, time: Option<usize>, node: Option<usize>, lhs: f64, rhs: f64) -> Evaluation {
        Evaluation { function, time, node, other: None, aux: None, lhs, rhs, tol: tolerance(self.h, lhs, rhs) }
    }

    /// Nodewise check of `lhs(t, i) ≤ rhs(t, i)` over the selected nodes.
    fn nodewise(
        &self,
        fi: usize,
        red: &mut Reducer,
        mut sides: impl FnMut(usize, f64) -> Result<(Vec<f64>, Vec<f64>), HeatError>,
    ) -> Result<(), HeatError> {
        for (ti, &t) in self.times.iter().enumerate() {
            let (lhs, rhs) = sides(ti, t)?;
            for &i in self.nodes {
                red.push(self.eval(fi, Some(ti), Some(i), lhs[i], rhs[i]));
            }
        }
        Ok(())
    }

    fn check_function(&self, id: InequalityId, fi: usize, f: &[f64]) -> Result<Reducer, HeatError> {
        let g = self.grid;
        let p = self.params;
        let (r1, r2, k) = (p.rho1(), p.rho2(), p.kappa());
        let w = (k + r2) / r1;
        let decay = |t: f64| (-2.0 * r1 * r2 * t / (k + r2)).exp();
        let mut red = Reducer::default();
        match id {
            InequalityId::GradLog => {
                let f = floor_eps(f);
                let lf = ln_vec(&f);
                let a = self.pt(&mul(&f, &g.gamma(&lf)))?;
                let b = self.pt(&mul(&f, &g.gamma_z(&lf)))?;
                let u = self.pt(&f)?;
                self.nodewise(fi, &mut red, |ti, t| {
                    let lu = ln_vec(&u[ti]);
                    let (gl, gz) = (g.gamma(&lu), g.gamma_z(&lu));
                    let lhs = (0..f.len()).map(|i| u[ti][i] * gl[i] + w * u[ti][i] * gz[i]).collect();
                    let rhs = (0..f.len()).map(|i| decay(t) * (a[ti][i] + w * b[ti][i])).collect();
                    Ok((lhs, rhs))
                })?;
            }
            InequalityId::Grad => {
                let a = self.pt(&g.gamma(f))?;
                let b = self.pt(&g.gamma_z(f))?;
                let u = self.pt(f)?;
                self.nodewise(fi, &mut red, |ti, t| {
                    let (gu, gz) = (g.gamma(&u[ti]), g.gamma_z(&u[ti]));
                    let lhs = (0..f.len()).map(|i| gu[i] + w * gz[i]).collect();
                    let rhs = (0..f.len()).map(|i| decay(t) * (a[ti][i] + w * b[ti][i])).collect();
                    Ok((lhs, rhs))
                })?;
            }
            InequalityId::GradAlpha => {
                let alpha = p.alpha();
                let f = floor_eps(f);
                let lf = ln_vec(&f);
                let (gl, gz) = (g.gamma(&lf), g.gamma_z(&lf));
                let a = self.pt(&(0..f.len()).map(|i| f[i] * (gl[i] + gz[i])).collect::<Vec<_>>())?;
                let u = self.pt(&f)?;
                self.nodewise(fi, &mut red, |ti, t| {
                    let lu = ln_vec(&u[ti]);
                    let (gl, gz) = (g.gamma(&lu), g.gamma_z(&lu));
                    let lhs = (0..f.len()).map(|i| u[ti][i] * (gl[i] + gz[i])).collect();
                    let rhs = a[ti].iter().map(|v| (2.0 * alpha * t).exp() * v).collect();
                    Ok((lhs, rhs))
                })?;
            }
            InequalityId::RevLsi => {
                let f = floor_eps(f);
                let a = self.pt(&mul(&f, &ln_vec(&f)))?;
                let u = self.pt(&f)?;
                self.nodewise(fi, &mut red, |ti, t| {
                    let lu = ln_vec(&u[ti]);
                    let (gl, gz) = (g.gamma(&lu), g.gamma_z(&lu));
                    let big_r = p.reverse_factor(t);
                    let lhs =
                        (0..f.len()).map(|i| t * u[ti][i] * gl[i] + r2 * t * t * u[ti][i] * gz[i]).collect();
                    let rhs = (0..f.len()).map(|i| big_r * (a[ti][i] - u[ti][i] * lu[i])).collect();
                    Ok((lhs, rhs))
                })?;
            }
            InequalityId::RevPoincare => {
                let a = self.pt(&mul(f, f))?;
                let u = self.pt(f)?;
                self.nodewise(fi, &mut red, |ti, t| {
                    let (gu, gz) = (g.gamma(&u[ti]), g.gamma_z(&u[ti]));
                    let big_r = p.reverse_factor(t);
                    let lhs = (0..f.len()).map(|i| t * gu[i] + r2 * t * t * gz[i]).collect();
                    let rhs = (0..f.len()).map(|i| 0.5 * big_r * (a[ti][i] - u[ti][i] * u[ti][i])).collect();
                    Ok((lhs, rhs))
                })?;
            }
            InequalityId::RegBound => {
                let sup_f = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let u = self.pt(f)?;
                for (ti, &t) in self.times.iter().enumerate() {
                    let gu = g.gamma(&u[ti]);
                    let (mut arg, mut best) = (self.nodes[0], f64::NEG_INFINITY);
                    for &i in self.nodes {
                        if gu[i] > best {
                            best = gu[i];
                            arg = i;
                        }
                    }
                    let c = ((0.5 + k / r2 + p.rho1_minus() * t) / t).sqrt();
                    red.push(self.eval(fi, Some(ti), Some(arg), best.sqrt(), c * sup_f));
                }
            }
            InequalityId::WangHarnack => {
                if let Some(i) = f.iter().position(|v| *v < 0.0) {
                    return Err(HeatError::NonPositive { index: i, value: f[i] });
                }
                let u = self.pt(f)?;
                for &alpha in &self.inputs.alphas {
                    let fa: Vec<f64> = f.iter().map(|v| v.powf(alpha)).collect();
                    let a = self.pt(&fa)?;
                    for (ti, &t) in self.times.iter().enumerate() {
                        let c = alpha / (alpha - 1.0) * p.harnack_factor(t);
                        for &(x, y, d) in self.pairs {
                            let lhs = u[ti][x].powf(alpha);
                            let rhs = a[ti][y] * (c * d * d).exp();
                            let mut e = self.eval(fi, Some(ti), Some(x), lhs, rhs);
                            e.other = Some(y);
                            e.aux = Some(alpha);
                            red.push(e);
                        }
                    }
                }
            }
            InequalityId::LogHarnack => {
                let f = floor_eps(f);
                let a = self.pt(&ln_vec(&f))?;
                let u = self.pt(&f)?;
                for (ti, &t) in self.times.iter().enumerate() {
                    let c = p.harnack_factor(t);
                    for &(x, y, d) in self.pairs {
                        let mut e = self.eval(fi, Some(ti), Some(x), a[ti][x], u[ti][y].ln() + c * d * d);
                        e.other = Some(y);
                        red.push(e);
                    }
                }
            }
            InequalityId::Hypercontract => {
                let rho0 = self.inputs.rho0.unwrap();
                let af: Vec<f64> = f.iter().map(|v| v.abs()).collect();
                let u = self.pt(&af)?;
                for &pe in &self.inputs.exponents {
                    let rhs = lp_norm(g.mu(), &af, pe);
                    for (ti, &t) in self.times.iter().enumerate() {
                        let q = 1.0 + (pe - 1.0) * (2.0 * rho0 * t).exp();
                        let mut e = self.eval(fi, Some(ti), None, lp_norm(g.mu(), &u[ti], q), rhs);
                        e.aux = Some(pe);
                        red.push(e);
                    }
                }
            }
            InequalityId::L1Smoothing => {
                let grad_l1: f64 = g.gamma(f).iter().zip(g.mu()).map(|(v, m)| m * v.sqrt()).sum();
                let u = self.pt(f)?;
                for (ti, &t) in self.times.iter().enumerate() {
                    let lhs: f64 = f.iter().zip(&u[ti]).zip(g.mu()).map(|((a, b), m)| m * (a - b).abs()).sum();
                    let c = (0.5 + k / r2 + p.rho1_minus() * t) * t.sqrt();
                    red.push(self.eval(fi, Some(ti), None, lhs, c * grad_l1));
                }
            }
            InequalityId::Poincare => {
                let c = (k + r2) / (r1 * r2);
                red.push(self.eval(fi, None, None, variance(g.mu(), f), c * g.dirichlet(f)));
            }
            InequalityId::MlsiVertical => {
                let f2 = floor_eps(&mul(f, f));
                let vert: f64 = g.integrate(&g.gamma_z(f));
                let c = 2.0 * (k + r2) / (r1 * r2);
                red.push(self.eval(fi, None, None, entropy(g.mu(), &f2)?, c * (g.dirichlet(f) + w * vert)));
            }
            InequalityId::Lsi => {
                let rho0 = self.inputs.rho0.unwrap();
                let f2 = floor_eps(&mul(f, f));
                red.push(self.eval(fi, None, None, entropy(g.mu(), &f2)?, 2.0 / rho0 * g.dirichlet(f)));
            }
            InequalityId::LsiDimConst => {
                let c = lsi_dim_constant(p);
                if c.is_finite() {
                    let f2 = floor_eps(&mul(f, f));
                    red.push(self.eval(fi, None, None, entropy(g.mu(), &f2)?, c * g.dirichlet(f)));
                }
            }
            InequalityId::KernelLower => unreachable!("kernel check is function independent"),
        }
        Ok(red)
    }

    fn check_kernel(&self) -> Result<Reducer, HeatError> {
        let mut by_source: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for &(x, y, d) in self.pairs {
            by_source.entry(x).or_default().push((y, d));
        }
        let doubled: Vec<f64> = self.times.iter().map(|t| 2.0 * t).collect();
        let sources: Vec<(&usize, &Vec<(usize, f64)>)> = by_source.iter().collect();
        let parts: Vec<Result<Reducer, HeatError>> = sources
            .par_iter()
            .map(|(&x, targets)| {
                let mut delta = vec![0.0; self.grid.nodes()];
                delta[x] = 1.0 / self.grid.mu()[x];
                let kernels = self.sg.apply_times(&delta, &doubled)?;
                let mut red = Reducer::default();
                for (ti, &t) in self.times.iter().enumerate() {
                    let c = self.params.harnack_factor(t);
                    for &(y, d) in targets.iter() {
                        let mut e = self.eval(0, Some(ti), Some(x), (-c * d * d).exp(), kernels[ti][y]);
                        e.other = Some(y);
                        red.push(e);
                    }
                }
                Ok(red)
            })
            .collect();
        let mut red = Reducer::default();
        for p in parts {
            red.merge(p?);
        }
        Ok(red)
    }
}

fn constants(id: InequalityId, p: &CDParams, times: &[f64], rho0: Option<f64>) -> Vec<Constant> {
    let (r1, r2, k) = (p.rho1(), p.rho2(), p.kappa());
    let mut out = Vec::new();
    let per_time = |out: &mut Vec<Constant>, name: &str, expr: &str, f: &dyn Fn(f64) -> f64| {
        for &t in times {
            out.push(Constant::new(format!("{name}(t={t})"), expr, f(t)));
        }
    };
    match id {
        InequalityId::GradLog | InequalityId::Grad => {
            out.push(Constant::new("w", "(kappa+rho2)/rho1", (k + r2) / r1));
            per_time(&mut out, "decay", "exp(-2*rho1*rho2*t/(kappa+rho2))", &|t| (-2.0 * r1 * r2 * t / (k + r2)).exp());
        }
        InequalityId::GradAlpha => {
            out.push(Constant::new("alpha", "-min(rho2, rho1-kappa, 0)", p.alpha()));
            per_time(&mut out, "growth", "exp(2*alpha*t)", &|t| (2.0 * p.alpha() * t).exp());
        }
        InequalityId::Poincare => {
            out.push(Constant::new("C", "(kappa+rho2)/(rho1*rho2)", (k + r2) / (r1 * r2)));
        }
        InequalityId::MlsiVertical => {
            out.push(Constant::new("C", "2*(kappa+rho2)/(rho1*rho2)", 2.0 * (k + r2) / (r1 * r2)));
            out.push(Constant::new("w", "(kappa+rho2)/rho1", (k + r2) / r1));
        }
        InequalityId::RevLsi => {
            per_time(&mut out, "R", "1+2*kappa/rho2+2*rho1_minus*t", &|t| p.reverse_factor(t));
        }
        InequalityId::RevPoincare => {
            per_time(&mut out, "R/2", "(1+2*kappa/rho2+2*rho1_minus*t)/2", &|t| p.reverse_factor(t) / 2.0);
        }
        InequalityId::RegBound => {
            per_time(&mut out, "c", "sqrt((1/2+kappa/rho2+rho1_minus*t)/t)", &|t| {
                ((0.5 + k / r2 + p.rho1_minus() * t) / t).sqrt()
            });
        }
        InequalityId::WangHarnack | InequalityId::LogHarnack | InequalityId::KernelLower => {
            per_time(&mut out, "c", "(1+2*kappa/rho2+2*rho1_minus*t)/(4*t)", &|t| p.harnack_factor(t));
        }
        InequalityId::Lsi => {
            if let Some(r0) = rho0 {
                out.push(Constant::new("C", "2/rho0", 2.0 / r0));
            }
        }
        InequalityId::Hypercontract => {
            if let Some(r0) = rho0 {
                per_time(&mut out, "q/(p-1)-slope", "exp(2*rho0*t)", &|t| (2.0 * r0 * t).exp());
            }
        }
        InequalityId::L1Smoothing => {
            per_time(&mut out, "c", "(1/2+kappa/rho2+rho1_minus*t)*sqrt(t)", &|t| {
                (0.5 + k / r2 + p.rho1_minus() * t) * t.sqrt()
            });
        }
        InequalityId::LsiDimConst => {
            out.push(Constant::new(
                "C",
                "3*(rho2+kappa)/(rho1*rho2)*(1+Phi(d/2*(1+3*kappa/(2*rho2)))), Phi(x)=(1+x)ln(1+x)-x*ln(x)",
                lsi_dim_constant(p),
            ));
        }
    }
    out
}

/// Evaluate inequality `id` on `grid` for the given inputs, times and parameters.
pub fn verify_inequality(
    grid: &GridModel,
    id: InequalityId,
    inputs: &CheckInputs,
    times: &[f64],
    params: &CDParams,
) -> Result<InequalityReport, HeatError> {
    if id.needs_positive_rho1() && params.rho1() <= 0.0 {
        return Err(HeatError::RequiresPositiveRho1(id.to_string()));
    }
    if id.needs_probability() && !grid.is_probability() {
        return Err(HeatError::InfiniteMeasure(id.to_string()));
    }
    if id.needs_rho0() && !inputs.rho0.map_or(false, |r| r > 0.0) {
        return Err(HeatError::MissingSideData { id: id.to_string(), what: "a positive rho0" });
    }
    if id.needs_pairs() && inputs.pairs == PairSelection::None {
        return Err(HeatError::MissingSideData { id: id.to_string(), what: "node pairs for the distance" });
    }
    if id == InequalityId::WangHarnack && inputs.alphas.iter().any(|a| !(*a > 1.0)) {
        return Err(HeatError::MissingSideData { id: id.to_string(), what: "exponents alpha > 1" });
    }
    if id == InequalityId::Hypercontract && inputs.exponents.iter().any(|a| !(*a > 1.0)) {
        return Err(HeatError::MissingSideData { id: id.to_string(), what: "exponents p > 1" });
    }
    let times: &[f64] = if id.uses_time() { times } else { &[] };
    if let Some(&t) = times.iter().find(|t| !(**t > 0.0)) {
        return Err(HeatError::NegativeTime(t));
    }
    if id != InequalityId::KernelLower && inputs.functions.is_empty() {
        return Err(HeatError::MissingSideData { id: id.to_string(), what: "at least one test function" });
    }

    let res = resolve(grid, inputs, id.needs_pairs());
    if res.nodes.is_empty() {
        return Err(HeatError::MissingSideData { id: id.to_string(), what: "a nonempty node selection" });
    }
    let ctx = Ctx {
        grid,
        sg: Semigroup::new(grid),
        times,
        nodes: &res.nodes,
        pairs: &res.pairs,
        params,
        inputs,
        h: grid.h(),
    };
    let red = if id == InequalityId::KernelLower {
        ctx.check_kernel()?
    } else {
        let parts: Vec<Result<Reducer, HeatError>> =
            res.values.par_iter().enumerate().map(|(fi, f)| ctx.check_function(id, fi, f)).collect();
        let mut red = Reducer::default();
        for p in parts {
            red.merge(p?);
        }
        red
    };

    let mut notes = Vec::new();
    if res.dropped_pairs > 0 {
        notes.push(format!(
            "{} pairs dropped: endpoints lie in different components of the jump lattice ({} components)",
            res.dropped_pairs,
            grid.component_count()
        ));
    }
    if id.needs_pairs() && grid.has_vertical() {
        notes.push("graph distance over flow-lattice paths bounds the sub-Riemannian distance from above".into());
    }
    if id == InequalityId::LsiDimConst {
        notes.push("formula evaluation plus LSI consistency check; the constant targets finite-d models with rho1 > 0".into());
        if !lsi_dim_constant(params).is_finite() {
            notes.push("constant is infinite for these parameters, check is vacuous".into());
        }
    }

    let names: Vec<&str> = if id == InequalityId::KernelLower {
        vec!["heat-kernel"]
    } else {
        inputs.functions.iter().map(|f| f.name.as_str()).collect()
    };
    let worst = red.worst().map(|e| witness(grid, &names, times, id, e));
    let (min_margin, tol) = match red.worst() {
        Some(e) => (e.margin(), e.tol),
        None => (f64::INFINITY, TOL_FLOOR),
    };
    let verdict = if min_margin >= -tol { Verdict::Pass } else { Verdict::Fail };
    Ok(InequalityReport {
        id: id.to_string(),
        params: Some(*params),
        rho0: inputs.rho0,
        times: times.to_vec(),
        sample: format!(
            "{} functions, {} nodes, {} pairs on {} ({} nodes, h = {})",
            if id == InequalityId::KernelLower { 0 } else { inputs.functions.len() },
            res.nodes.len(),
            res.pairs.len(),
            grid.name,
            grid.nodes(),
            grid.h()
        ),
        evaluations: red.count(),
        min_margin,
        tolerance: tol,
        worst,
        verdict,
        grid_h: Some(grid.h()),
        constants: constants(id, params, times, inputs.rho0),
        notes,
        half_resolution: None,
    })
}

fn witness(grid: &GridModel, names: &[&str], times: &[f64], id: InequalityId, e: &Evaluation) -> CheckWitness {
    CheckWitness {
        function: names[e.function].to_string(),
        time: e.time.map(|i| times[i]),
        node: e.node,
        point: e.node.map(|i| grid.point(i).to_vec()).unwrap_or_default(),
        other_node: e.other,
        other_point: e.other.map(|i| grid.point(i).to_vec()).unwrap_or_default(),
        detail: e.aux.map(|a| match id {
            InequalityId::Hypercontract => format!("p = {a}"),
            _ => format!("alpha = {a}"),
        }),
        lhs: e.lhs,
        rhs: e.rhs,
        margin: e.margin(),
        tolerance: e.tol,
    }
}

/// Run `id` on `fine` and attach the rerun on `coarse`.
pub fn verify_with_rerun(
    fine: &GridModel,
    coarse: &GridModel,
    id: InequalityId,
    inputs: &CheckInputs,
    times: &[f64],
    params: &CDParams,
) -> Result<InequalityReport, HeatError> {
    let a = verify_inequality(fine, id, inputs, times, params)?;
    let b = verify_inequality(coarse, id, inputs, times, params)?;
    Ok(a.with_rerun(b))
}
