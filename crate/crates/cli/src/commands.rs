//! One function per subcommand, each producing check records.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use subgamma::cd::{search_params, search_rho2_kappa, CdStatus, Certifier, CertifyConfig, FreeParam, SearchSpec};
use subgamma::geometry::{verify_isoperimetry, GridSet};
use subgamma::heat::{
    discretize, heisenberg_battery, ou_battery, spectral_gap, verify_inequality, CheckInputs, GridModel, GridSpec,
    HeatError, InequalityId, NodeSelection, PairSelection, TestFunction,
};
use subgamma::metric::{
    cached_distance, normalize_density, verify_entropy_wasserstein, verify_modified_hwi, wasserstein2,
};
use subgamma::models::{resolve_model, ModelDescriptor};
use subgamma::report::Constant;
use subgamma::symbolic::{check_commutation, parse_poly, BatterySpec};
use subgamma::CDParams;

use crate::config::{Battery, GridConfig, HeatSection, JobConfig};
use crate::document::{CheckRecord, Outcome};
use crate::CliError;

pub const DEFAULT_TIMES: [f64; 4] = [0.05, 0.1, 0.5, 1.0];

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

pub fn load_model(config: &JobConfig) -> Result<ModelDescriptor, CliError> {
    let name = config.model.as_deref().ok_or_else(|| CliError::Schema("no model given".into()))?;
    resolve_model(name).map_err(|e| CliError::Schema(e.to_string()))
}

/// Claimed parameters with free entries set to 1, then the overrides.
pub fn resolve_params(model: &ModelDescriptor, config: &JobConfig) -> Result<Option<CDParams>, CliError> {
    let o = &config.params;
    let c = &model.claimed;
    let pick = |over: Option<f64>, spec: &subgamma::models::ParamSpec| {
        over.or_else(|| match spec {
            subgamma::models::ParamSpec::Free => Some(1.0),
            other => other.value(),
        })
    };
    let values = (
        pick(o.rho1, &c.rho1),
        pick(o.rho2, &c.rho2),
        pick(o.kappa, &c.kappa),
        pick(o.d.map(|d| d.value()), &c.d),
    );
    match values {
        (Some(a), Some(b), Some(k), Some(d)) => {
            CDParams::new(a, b, k, d).map(Some).map_err(|e| CliError::Schema(e.to_string()))
        }
        _ => Ok(None),
    }
}

fn require_params(model: &ModelDescriptor, config: &JobConfig) -> Result<CDParams, CliError> {
    resolve_params(model, config)?.ok_or_else(|| {
        CliError::Schema(format!("{} leaves parameters to search; give them under [params]", model.name))
    })
}

pub fn build_grid(model: &ModelDescriptor, grid: &GridConfig, h: f64) -> Result<GridModel, CliError> {
    let extents: Vec<(f64, f64)> = grid.extents.iter().map(|e| (e[0], e[1])).collect();
    let spec = GridSpec::for_operator(&model.operator, h, &extents, grid.boundary).map_err(|e| CliError::Schema(e.to_string()))?;
    discretize(model, &spec).map_err(compute)
}

fn grid_config(config: &JobConfig) -> Result<&GridConfig, CliError> {
    config.grid.as_ref().ok_or_else(|| CliError::Schema("this command needs a [grid] section".into()))
}

pub fn certify_cd(config: &JobConfig, tol: Option<f64>) -> Result<Vec<CheckRecord>, CliError> {
    let model = load_model(config)?;
    let op = &model.operator;
    let section = config.certify.clone().unwrap_or_default();
    let defaults = CertifyConfig::default();
    let cfg = CertifyConfig {
        base_points: section.base_points.unwrap_or(defaults.base_points),
        jets_per_point: section.jets_per_point.unwrap_or(defaults.jets_per_point),
        box_half_width: section.box_half_width.unwrap_or(defaults.box_half_width),
        tol: tol.unwrap_or(defaults.tol),
        seed: config.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let mut records = Vec::new();

    let battery = BatterySpec { seed: config.seed(), ..BatterySpec::default() };
    let mut worst_terms = 0;
    for f in battery.generate(op.arity()) {
        worst_terms = worst_terms.max(check_commutation(op, &f).map_err(compute)?.len());
    }
    records.push(CheckRecord {
        id: "COMMUTATION".into(),
        label: format!("{}, 50 random polynomials", model.name),
        outcome: if worst_terms == 0 { Outcome::Pass } else { Outcome::Fail },
        min_margin: None,
        tolerance: Some(0.0),
        lhs: None,
        rhs: None,
        constants: Vec::new(),
        notes: vec!["exact rational arithmetic; pass means every residual polynomial is identically zero".into()],
        detail: json!({ "largest_residual_terms": worst_terms }),
    });

    let certifier = Certifier::new(op, cfg).map_err(compute)?;
    let params = resolve_params(&model, config)?;
    let search = section.search.clone().or_else(|| {
        params.is_none().then(|| crate::config::SearchSection {
            free: "rho2-kappa".into(),
            lo: 0.01,
            hi: 4.0,
            resolution: 1e-3,
            kappas: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
        })
    });
    if let Some(p) = params {
        let v = certifier.certify(&p);
        records.push(CheckRecord {
            id: "CD".into(),
            label: format!("{} {p}", model.name),
            outcome: if v.status == CdStatus::Certified { Outcome::Pass } else { Outcome::Fail },
            min_margin: v.min_margin.is_finite().then_some(v.min_margin),
            tolerance: Some(v.tol),
            lhs: None,
            rhs: None,
            constants: vec![Constant::new("margin", "Gamma2 - (Lf)^2/d - rho1*Gamma - rho2*GammaZ + 2*sqrt(kappa*Gamma2Z*Gamma)", v.min_margin)],
            notes: v.notes.clone(),
            detail: serde_json::to_value(&v).map_err(compute)?,
        });
    }
    if let Some(s) = search {
        let base = match params {
            Some(p) => p,
            None => {
                let c = &model.claimed;
                let d = config.params.d.map(|d| d.value()).or(c.d.value()).unwrap_or(f64::INFINITY);
                let rho1 = config.params.rho1.or(c.rho1.value()).unwrap_or(0.0);
                CDParams::new(rho1, 1.0, 0.0, d).map_err(|e| CliError::Schema(e.to_string()))?
            }
        };
        let result = if s.free == "rho2-kappa" {
            search_rho2_kappa(&certifier, &base, &s.kappas, (s.lo, s.hi), s.resolution)
        } else {
            let free = match s.free.as_str() {
                "rho1" => FreeParam::Rho1,
                "rho2" => FreeParam::Rho2,
                "kappa" => FreeParam::Kappa,
                "d" => FreeParam::D,
                other => return Err(CliError::Schema(format!("unknown free parameter {other:?}"))),
            };
            search_params(&certifier, &base, SearchSpec { free, lo: s.lo, hi: s.hi, resolution: s.resolution })
        };
        records.push(match result {
            Ok(r) => CheckRecord {
                id: "CD_SEARCH".into(),
                label: format!("{} free {}", model.name, s.free),
                outcome: Outcome::Pass,
                min_margin: None,
                tolerance: Some(s.resolution),
                lhs: None,
                rhs: None,
                constants: vec![
                    Constant::new("rho1", "best certified", r.best.rho1()),
                    Constant::new("rho2", "best certified", r.best.rho2()),
                    Constant::new("kappa", "best certified", r.best.kappa()),
                    Constant::new("d", "best certified", r.best.d()),
                ],
                notes: Vec::new(),
                detail: serde_json::to_value(&r).map_err(compute)?,
            },
            Err(e) => CheckRecord {
                id: "CD_SEARCH".into(),
                label: format!("{} free {}", model.name, s.free),
                outcome: Outcome::Fail,
                min_margin: None,
                tolerance: None,
                lhs: None,
                rhs: None,
                constants: Vec::new(),
                notes: vec![e.to_string()],
                detail: serde_json::Value::Null,
            },
        });
    }
    Ok(records)
}

fn test_functions(model: &ModelDescriptor, section: &HeatSection, seed: u64) -> Result<Vec<TestFunction>, CliError> {
    let mut fs = match section.battery {
        Some(Battery::Ou) => ou_battery(seed),
        Some(Battery::Heisenberg) => heisenberg_battery(seed),
        None => Vec::new(),
    };
    let names = model.operator.names().to_vec();
    for expr in &section.functions {
        let p = parse_poly(expr, &names).map_err(|e| CliError::Schema(e.to_string()))?;
        fs.push(TestFunction::new(expr.clone(), move |x| p.eval_f64(x)));
    }
    Ok(fs)
}

fn heat_ids(section: &HeatSection) -> Result<(Vec<InequalityId>, bool), CliError> {
    if section.ids.iter().any(|s| s == "all") {
        return Ok((InequalityId::ALL.to_vec(), true));
    }
    let ids = section
        .ids
        .iter()
        .map(|s| s.parse::<InequalityId>().map_err(|e| CliError::Schema(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((ids, false))
}

pub fn heat_verify(config: &JobConfig, h: Option<f64>) -> Result<Vec<CheckRecord>, CliError> {
    let section = config.heat.as_ref().ok_or_else(|| CliError::Schema("heat-verify needs a [heat] section".into()))?;
    let (ids, all) = heat_ids(section)?;
    let model = load_model(config)?;
    let params = require_params(&model, config)?;
    let gc = grid_config(config)?;
    let h = h.unwrap_or(gc.h);
    let functions = test_functions(&model, section, config.seed())?;
    let times = if section.times.is_empty() { DEFAULT_TIMES.to_vec() } else { section.times.clone() };
    let mut inputs = CheckInputs::new(functions);
    inputs.seed = config.seed();
    inputs.rho0 = section.rho0;
    inputs.nodes = match section.interior {
        Some(f) => NodeSelection::Interior(f),
        None => NodeSelection::All,
    };
    inputs.pairs = if !section.pairs.is_empty() {
        PairSelection::Points(section.pairs.iter().map(|[a, b]| (a.clone(), b.clone())).collect())
    } else {
        match section.pair_sources {
            Some(sources) => PairSelection::Sampled { sources },
            None => PairSelection::AllNodes,
        }
    };
    if let Some(a) = &section.alphas {
        inputs.alphas = a.clone();
    }
    if let Some(e) = &section.exponents {
        inputs.exponents = e.clone();
    }
    let fine = build_grid(&model, gc, h)?;
    let coarse = if gc.half_resolution { Some(build_grid(&model, gc, 2.0 * h)?) } else { None };
    let mut records = Vec::new();
    for id in ids {
        let run = |g: &GridModel| verify_inequality(g, id, &inputs, &times, &params);
        let result = run(&fine).and_then(|r| match &coarse {
            Some(c) => Ok(r.with_rerun(run(c)?)),
            None => Ok(r),
        });
        match result {
            Ok(r) => records.push(CheckRecord::from_inequality(fine.name.clone(), &r)),
            Err(
                e @ (HeatError::RequiresPositiveRho1(_)
                | HeatError::InfiniteMeasure(_)
                | HeatError::MissingSideData { .. }),
            ) if all => records.push(CheckRecord::skipped(id.name(), fine.name.clone(), e.to_string())),
            Err(e @ (HeatError::RequiresPositiveRho1(_) | HeatError::MissingSideData { .. })) => {
                return Err(CliError::Schema(format!("{id}: {e}")))
            }
            Err(e) => return Err(CliError::Compute(format!("{id}: {e}"))),
        }
    }
    Ok(records)
}

pub fn spectral(config: &JobConfig, h: Option<f64>) -> Result<Vec<CheckRecord>, CliError> {
    let model = load_model(config)?;
    let gc = grid_config(config)?;
    let grid = build_grid(&model, gc, h.unwrap_or(gc.h))?;
    let section = config.spectral.clone().unwrap_or_default();
    let gap = spectral_gap(grid.generator(), grid.mu()).map_err(compute)?;
    let params = resolve_params(&model, config)?;
    let (outcome, constants, margin) = match (section.expected_gap, params) {
        (Some(e), _) => (
            if (gap.gap - e).abs() <= section.rel_tol * e { Outcome::Pass } else { Outcome::Fail },
            vec![Constant::new("expected_gap", "configured", e)],
            section.rel_tol * e - (gap.gap - e).abs(),
        ),
        (None, Some(p)) if p.rho1() > 0.0 => {
            let bound = p.rho1() * p.rho2() / (p.kappa() + p.rho2());
            // The discrete gap approximates the continuum one to O(h²).
            let slack = section.rel_tol * bound;
            (
                if gap.gap >= bound - slack { Outcome::Pass } else { Outcome::Fail },
                vec![Constant::new("poincare", "(kappa+rho2)/(rho1*rho2)", 1.0 / bound)],
                gap.gap - (bound - slack),
            )
        }
        _ => (Outcome::Pass, Vec::new(), f64::INFINITY),
    };
    Ok(vec![CheckRecord {
        id: "SPECTRAL_GAP".into(),
        label: grid.name.clone(),
        outcome,
        min_margin: margin.is_finite().then_some(margin),
        tolerance: Some(section.rel_tol),
        lhs: None,
        rhs: Some(gap.gap),
        constants,
        notes: gap.warnings.clone(),
        detail: serde_json::to_value(&gap).map_err(compute)?,
    }])
}

/// Positive mixture of Gaussian bumps at the nodes, as a density against `μ`.
pub fn random_density(grid: &GridModel, rng: &mut impl Rng) -> Vec<f64> {
    let n = grid.arity();
    let bumps: Vec<(f64, Vec<f64>, f64)> = (0..3)
        .map(|_| {
            let centre: Vec<f64> = grid.axes().iter().map(|a| {
                let (lo, hi) = (a.min, a.min + a.spacing * (a.count - 1) as f64);
                let mid = (lo + hi) / 2.0;
                rng.gen_range(mid - (hi - lo) / 6.0..mid + (hi - lo) / 6.0)
            }).collect();
            (rng.gen_range(0.1..1.0), centre, rng.gen_range(0.3..1.2))
        })
        .collect();
    let mass: Vec<f64> = (0..grid.nodes())
        .map(|i| {
            let p = grid.point(i);
            1e-12 + bumps
                .iter()
                .map(|(w, c, s)| w * (-(0..n).map(|k| (p[k] - c[k]).powi(2)).sum::<f64>() / (2.0 * s * s)).exp())
                .sum::<f64>()
        })
        .collect();
    let f: Vec<f64> = mass.iter().zip(grid.mu()).map(|(m, w)| m / w).collect();
    normalize_density(grid, &f)
}

pub fn transport(config: &JobConfig, h: Option<f64>, out: &Path) -> Result<Vec<CheckRecord>, CliError> {
    let section = config
        .transport
        .as_ref()
        .ok_or_else(|| CliError::Schema("transport needs a [transport] section".into()))?;
    let model = load_model(config)?;
    let params = require_params(&model, config)?;
    let gc = grid_config(config)?;
    let grid = build_grid(&model, gc, h.unwrap_or(gc.h))?;
    let all: Vec<usize> = (0..grid.nodes()).collect();
    let dist = cached_distance(&grid, &all, out).map_err(compute)?;
    let times = if section.times.is_empty() { vec![0.25, 1.0] } else { section.times.clone() };

    let mut densities: Vec<(String, Vec<f64>, Option<f64>)> = section
        .shifts
        .iter()
        .map(|&m| (format!("shift {m}"), normalize_density(&grid, &grid.sample(|p| (m * p[0]).exp())), Some(m)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    for k in 0..section.random_densities {
        densities.push((format!("mixture-{k}"), random_density(&grid, &mut rng), None));
    }
    let per_density: Vec<Result<Vec<CheckRecord>, CliError>> = densities
        .par_iter()
        .map(|(label, f, shift)| {
            let mut out = Vec::new();
            if let Some(m) = shift {
                let nu: Vec<f64> = f.iter().zip(grid.mu()).map(|(a, b)| a * b).collect();
                let (w2, plan) = wasserstein2(&dist, grid.mu(), &nu).map_err(compute)?;
                let err = (w2 - m.abs()).abs();
                out.push(CheckRecord {
                    id: "W2_SHIFT".into(),
                    label: label.clone(),
                    outcome: if err <= 2.0 * grid.h() { Outcome::Pass } else { Outcome::Fail },
                    min_margin: Some(2.0 * grid.h() - err),
                    tolerance: Some(2.0 * grid.h()),
                    lhs: Some(w2),
                    rhs: Some(m.abs()),
                    constants: vec![Constant::new("W2", "sqrt(min sum d^2 Pi)", w2)],
                    notes: vec![format!("relative duality gap {:.2e}", plan.duality_gap)],
                    detail: json!({ "w2": w2, "shift": m, "duality_gap": plan.duality_gap, "iterations": plan.iterations }),
                });
            }
            let r = verify_entropy_wasserstein(&grid, f, &times, &params, &dist, label).map_err(compute)?;
            out.push(CheckRecord::from_inequality(label.clone(), &r));
            if let Some(c) = section.hwi_c {
                let r = verify_modified_hwi(&grid, f, c, section.hwi_horizon, &params, &dist, label).map_err(compute)?;
                out.push(CheckRecord::from_inequality(label.clone(), &r.hypothesis));
                out.push(CheckRecord::from_inequality(label.clone(), &r.conclusion));
            }
            Ok(out)
        })
        .collect();
    let mut records = Vec::new();
    for r in per_density {
        records.extend(r?);
    }
    Ok(records)
}

pub fn isoperimetry(config: &JobConfig, h: Option<f64>) -> Result<Vec<CheckRecord>, CliError> {
    let section = config
        .isoperimetry
        .as_ref()
        .ok_or_else(|| CliError::Schema("isoperimetry needs an [isoperimetry] section".into()))?;
    let model = load_model(config)?;
    let params = require_params(&model, config)?;
    let gc = grid_config(config)?;
    let grid = build_grid(&model, gc, h.unwrap_or(gc.h))?;
    let names = model.operator.names().to_vec();
    let mut sets = Vec::new();
    for expr in &section.sets {
        let s = GridSet::parse(&grid, expr, &names).map_err(|e| CliError::Schema(e.to_string()))?;
        sets.push((expr.clone(), s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let mut found = 0;
    let mut attempts = 0;
    while found < section.random_sets {
        attempts += 1;
        if attempts > 100 * section.random_sets.max(1) {
            return Err(CliError::Compute("could not draw random sets of measure at most 1/2".into()));
        }
        let coef: Vec<(f64, f64, f64)> = (0..grid.arity())
            .map(|_| (rng.gen_range(0.2..1.5), rng.gen_range(0.3..3.0), rng.gen_range(0.0..6.3)))
            .collect();
        let slope = rng.gen_range(-1.0..1.0);
        let c = rng.gen_range(-1.5..1.5);
        let f = move |p: &[f64]| slope * p[0] + coef.iter().zip(p).map(|((a, w, ph), x)| a * (w * x + ph).sin()).sum::<f64>();
        let s = GridSet::sublevel(&grid, f, c);
        if s.is_empty() || s.measure() > 0.5 {
            continue;
        }
        sets.push((format!("random-{found}"), s));
        found += 1;
    }
    sets.par_iter()
        .map(|(label, s)| {
            verify_isoperimetry(&grid, s, section.rho0, &params, section.steps, label)
                .map(|r| CheckRecord::from_inequality(label.clone(), &r))
                .map_err(|e| match e {
                    subgamma::geometry::GeometryError::TooLarge { .. } => CliError::Schema(format!("{label}: {e}")),
                    other => compute(other),
                })
        })
        .collect()
}
