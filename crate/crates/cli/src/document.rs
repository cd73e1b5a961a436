//! Report documents: JSON for machines, a CSV of margins and a plain table.

use std::io::Write;

use serde::{Deserialize, Serialize};
use subgamma::report::{Constant, InequalityReport, Verdict};

use crate::config::JobConfig;

pub const SCHEMA: &str = "subgamma-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Preconditions of the check do not hold for this model.
    Skipped,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub label: String,
    pub outcome: Outcome,
    pub min_margin: Option<f64>,
    pub tolerance: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub constants: Vec<Constant>,
    pub notes: Vec<String>,
    /// The full result of the underlying computation.
    pub detail: serde_json::Value,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl CheckRecord {
    pub fn from_inequality(label: impl Into<String>, r: &InequalityReport) -> Self {
        let outcome = if r.passed() { Outcome::Pass } else { Outcome::Fail };
        let mut notes = r.notes.clone();
        if let Some(h) = &r.half_resolution {
            notes.push(format!("half-resolution rerun: {:?}, margin {:e}", h.verdict, h.min_margin));
        }
        CheckRecord {
            id: r.id.clone(),
            label: label.into(),
            outcome,
            min_margin: finite(r.min_margin),
            tolerance: Some(r.tolerance),
            lhs: r.worst.as_ref().map(|w| w.lhs),
            rhs: r.worst.as_ref().map(|w| w.rhs),
            constants: r.constants.clone(),
            notes,
            detail: serde_json::to_value(r).expect("reports serialize"),
        }
    }

    pub fn skipped(id: impl Into<String>, label: impl Into<String>, reason: String) -> Self {
        CheckRecord {
            id: id.into(),
            label: label.into(),
            outcome: Outcome::Skipped,
            min_margin: None,
            tolerance: None,
            lhs: None,
            rhs: None,
            constants: Vec::new(),
            notes: vec![reason],
            detail: serde_json::Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub wall_time_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config: JobConfig,
    /// The only field that varies between identical runs.
    pub header: Header,
    pub checks: Vec<CheckRecord>,
}

impl ReportDocument {
    pub fn new(command: &str, config: &JobConfig, checks: Vec<CheckRecord>, wall: f64) -> Self {
        ReportDocument {
            schema: SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed(),
            config: config.clone(),
            header: Header { wall_time_seconds: wall },
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    /// Canonical bytes of the check records.
    pub fn checks_json(&self) -> String {
        serde_json::to_string(&self.checks).expect("checks serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn write_csv(&self, w: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "label", "outcome", "min_margin", "tolerance", "lhs", "rhs"])?;
        let show = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for c in &self.checks {
            out.write_record([
                c.id.clone(),
                c.label.clone(),
                format!("{:?}", c.outcome).to_lowercase(),
                show(c.min_margin),
                show(c.tolerance),
                show(c.lhs),
                show(c.rhs),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn table(&self) -> String {
        let mut s = format!("{} on {} (seed {})\n", self.command, self.config.model.as_deref().unwrap_or("-"), self.seed);
        let width = self.checks.iter().map(|c| c.id.len() + c.label.len() + 3).max().unwrap_or(10);
        for c in &self.checks {
            let name = format!("{} [{}]", c.id, c.label);
            let outcome = format!("{:?}", c.outcome).to_uppercase();
            let margin = c.min_margin.map(|m| format!("margin {m:+.3e}")).unwrap_or_default();
            s.push_str(&format!("{name:<width$}  {outcome:<7} {margin}\n"));
            for k in &c.constants {
                s.push_str(&format!("{:width$}    {} = {} = {:.6e}\n", "", k.name, k.expression, k.value));
            }
        }
        let fails = self.checks.iter().filter(|c| c.outcome == Outcome::Fail).count();
        s.push_str(&format!("{} checks, {} failed\n", self.checks.len(), fails));
        s
    }
}
