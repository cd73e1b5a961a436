//! Bisection over one free curvature parameter.

use serde::{Deserialize, Serialize};

use super::certify::{CdStatus, CdVerdict, Certifier};
use super::CdError;
use crate::params::CDParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeParam {
    Rho1,
    Rho2,
    Kappa,
    D,
}

impl FreeParam {
    /// Certification is preserved when `ρ₁, ρ₂` decrease or `κ, d` increase,
    /// so the objective is to push `ρ₁, ρ₂` up and `κ, d` down.
    fn maximize(self) -> bool {
        matches!(self, FreeParam::Rho1 | FreeParam::Rho2)
    }

    fn set(self, base: &CDParams, value: f64) -> Result<CDParams, CdError> {
        Ok(match self {
            FreeParam::Rho1 => base.with_rho1(value)?,
            FreeParam::Rho2 => base.with_rho2(value)?,
            FreeParam::Kappa => base.with_kappa(value)?,
            FreeParam::D => base.with_d(value)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub free: FreeParam,
    pub lo: f64,
    pub hi: f64,
    /// Stop when the bracket is narrower than this.
    pub resolution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub spec: SearchSpec,
    /// Best certified point found.
    pub best: CDParams,
    /// First non-certified point bracketing `best`; `None` when the whole box certified.
    pub bracket: Option<CDParams>,
    pub bracket_status: Option<CdStatus>,
    pub evaluations: usize,
    pub best_verdict: CdVerdict,
}

/// Bisect the free parameter of `base` inside `[lo, hi]`.
pub fn search_params(certifier: &Certifier, base: &CDParams, spec: SearchSpec) -> Result<SearchResult, CdError> {
    if !(spec.lo < spec.hi) || !(spec.resolution > 0.0) {
        return Err(CdError::SearchBox(format!("invalid interval [{}, {}]", spec.lo, spec.hi)));
    }
    let (mut good, mut bad) = if spec.free.maximize() { (spec.lo, spec.hi) } else { (spec.hi, spec.lo) };
    let mut evaluations = 0;
    let mut eval = |value: f64| -> Result<CdVerdict, CdError> {
        evaluations += 1;
        Ok(certifier.certify(&spec.free.set(base, value)?))
    };
    let good_verdict = eval(good)?;
    if good_verdict.status != CdStatus::Certified {
        return Err(CdError::NoCertifiedPoint { value: good, status: good_verdict.status });
    }
    let mut best_verdict = good_verdict;
    let bad_verdict = eval(bad)?;
    if bad_verdict.status == CdStatus::Certified {
        return Ok(SearchResult {
            spec,
            best: spec.free.set(base, bad)?,
            bracket: None,
            bracket_status: None,
            evaluations,
            best_verdict: bad_verdict,
        });
    }
    let mut bad_status = bad_verdict.status;
    while (bad - good).abs() > spec.resolution {
        let mid = 0.5 * (good + bad);
        let v = eval(mid)?;
        if v.status == CdStatus::Certified {
            good = mid;
            best_verdict = v;
        } else {
            bad = mid;
            bad_status = v.status;
        }
    }
    Ok(SearchResult {
        spec,
        best: spec.free.set(base, good)?,
        bracket: Some(spec.free.set(base, bad)?),
        bracket_status: Some(bad_status),
        evaluations,
        best_verdict,
    })
}

/// Largest certified `ρ₂` for each `κ` in `kappas`, other parameters fixed.
pub fn rho2_kappa_frontier(
    certifier: &Certifier,
    base: &CDParams,
    kappas: &[f64],
    rho2_range: (f64, f64),
    resolution: f64,
) -> Vec<Result<SearchResult, CdError>> {
    kappas
        .iter()
        .map(|&k| {
            let b = base.with_kappa(k)?;
            search_params(
                certifier,
                &b,
                SearchSpec { free: FreeParam::Rho2, lo: rho2_range.0, hi: rho2_range.1, resolution },
            )
        })
        .collect()
}

/// Scan `kappas` in order and return the first one admitting a certified
/// `ρ₂` in `rho2_range`, with that `ρ₂` pushed up by bisection.
pub fn search_rho2_kappa(
    certifier: &Certifier,
    base: &CDParams,
    kappas: &[f64],
    rho2_range: (f64, f64),
    resolution: f64,
) -> Result<SearchResult, CdError> {
    let mut last = Err(CdError::SearchBox("no kappa values".into()));
    for &k in kappas {
        let b = base.with_kappa(k)?;
        let spec = SearchSpec { free: FreeParam::Rho2, lo: rho2_range.0, hi: rho2_range.1, resolution };
        last = search_params(certifier, &b, spec);
        if last.is_ok() {
            return last;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cd::CertifyConfig;
    use crate::models::ornstein_uhlenbeck;

    #[test]
    fn ou_rho1_bisection() {
        let op = ornstein_uhlenbeck(1).unwrap().operator;
        let cfg = CertifyConfig { base_points: 8, jets_per_point: 50, ..CertifyConfig::default() };
        let c = Certifier::new(&op, cfg).unwrap();
        let base = CDParams::new(0.0, 1.0, 0.0, f64::INFINITY).unwrap();
        let r = search_params(&c, &base, SearchSpec { free: FreeParam::Rho1, lo: 0.0, hi: 2.0, resolution: 1e-4 })
            .unwrap();
        assert!((r.best.rho1() - 1.0).abs() < 1e-3, "{}", r.best);
        assert!(r.bracket.unwrap().rho1() > r.best.rho1());
    }

    #[test]
    fn empty_box_is_an_error() {
        let op = ornstein_uhlenbeck(1).unwrap().operator;
        let cfg = CertifyConfig { base_points: 4, jets_per_point: 20, ..CertifyConfig::default() };
        let c = Certifier::new(&op, cfg).unwrap();
        let base = CDParams::new(0.0, 1.0, 0.0, f64::INFINITY).unwrap();
        let r = search_params(&c, &base, SearchSpec { free: FreeParam::Rho1, lo: 1.5, hi: 2.0, resolution: 1e-2 });
        assert!(matches!(r, Err(CdError::NoCertifiedPoint { .. })));
    }
}
