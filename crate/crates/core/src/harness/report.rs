use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{HarnessError, SweepConfig};
use crate::hybrid::{Check, HybridSpec};
use crate::rational::{self, to_f64};
use crate::Rational;

fn opt_str(r: &Option<Rational>) -> String {
    r.as_ref().map(rational::format).unwrap_or_default()
}

fn opt_f64(r: &Option<Rational>) -> String {
    r.as_ref().map(|x| to_f64(x).to_string()).unwrap_or_default()
}

/// Worst sequence of one template.
///
/// `ratio` is `alg_cost / denominator`, where the denominator is
/// `opt_max_cost` for tree-strong families and `opt_cost` otherwise. It is
/// `None` when the denominator is zero but the algorithm paid something.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub digest: String,
    pub alg: String,
    pub k: usize,
    pub m: usize,
    pub sequences: usize,
    #[serde(with = "rational::serde_str")]
    pub alg_cost: Rational,
    #[serde(with = "rational::serde_str")]
    pub opt_cost: Rational,
    #[serde(serialize_with = "ser_opt")]
    pub opt_max_cost: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub ratio: Option<Rational>,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub pass: bool,
}

fn ser_opt<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(x) => s.serialize_some(&rational::format(x)),
        None => s.serialize_none(),
    }
}

impl SweepRow {
    /// Whether `ratio <= bound`, the only pass criterion of a row.
    pub fn within_bound(&self) -> bool {
        self.ratio.is_some_and(|r| r <= self.bound)
    }
}

/// One hybrid check on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub digest: String,
    pub t_d: usize,
    pub a_d: usize,
    pub check: String,
    #[serde(serialize_with = "ser_opt")]
    pub lhs: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub rhs: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub slack: Option<Rational>,
    pub pass: bool,
    pub detail: String,
}

impl Finding {
    pub fn new(digest: &str, spec: HybridSpec, check: &Check) -> Self {
        Self {
            digest: digest.to_string(),
            t_d: spec.t_d,
            a_d: spec.a_d,
            check: check.kind.as_str().to_string(),
            lhs: check.bound.map(|b| b.0),
            rhs: check.bound.map(|b| b.1),
            slack: check.slack(),
            pass: check.pass,
            detail: check.detail.clone(),
        }
    }
}

/// Per-check counts of a hybrid sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub evaluated: usize,
    pub failed: usize,
    #[serde(serialize_with = "ser_opt")]
    pub min_slack: Option<Rational>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub templates: usize,
    pub sequences: usize,
    pub violations: usize,
    #[serde(serialize_with = "ser_opt")]
    pub max_ratio: Option<Rational>,
    pub max_ratio_digest: Option<String>,
    /// Largest `ratio / bound` over rows, as a float.
    pub max_bound_usage: Option<f64>,
    pub checks: BTreeMap<String, CheckTally>,
}

impl Summary {
    /// Aggregates over bound rows. Recomputing from the same rows gives the
    /// same summary.
    pub fn from_rows(rows: &[SweepRow]) -> Self {
        let mut s = Summary { templates: rows.len(), ..Summary::default() };
        for row in rows {
            s.sequences += row.sequences;
            if !row.pass {
                s.violations += 1;
            }
            if let Some(r) = row.ratio {
                if s.max_ratio.is_none_or(|m| r > m) {
                    s.max_ratio = Some(r);
                    s.max_ratio_digest = Some(row.digest.clone());
                }
                let usage = to_f64(&(r / row.bound));
                if s.max_bound_usage.is_none_or(|u| usage > u) {
                    s.max_bound_usage = Some(usage);
                }
            }
        }
        s
    }

    /// Aggregates over hybrid check outcomes.
    pub fn from_checks<'a>(templates: usize, checks: impl IntoIterator<Item = &'a Check>) -> Self {
        let mut s = Summary { templates, ..Summary::default() };
        for c in checks {
            s.sequences += 1;
            let tally = s.checks.entry(c.kind.as_str().to_string()).or_default();
            tally.evaluated += 1;
            if !c.pass {
                tally.failed += 1;
                s.violations += 1;
            }
            if let Some(slack) = c.slack() {
                if tally.min_slack.is_none_or(|m| slack < m) {
                    tally.min_slack = Some(slack);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub seed: u64,
    /// Seconds since the Unix epoch; `None` for byte-reproducible output.
    pub timestamp: Option<u64>,
    pub summary: Summary,
    pub rows: Vec<SweepRow>,
    pub findings: Vec<Finding>,
}

impl SweepReport {
    pub fn stamp(&mut self) {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        self.timestamp = Some(now);
    }

    pub fn write_json(&self, out: impl Write) -> Result<(), HarnessError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Bound rows as CSV. Exact values are `p/q`; each has a float twin.
    pub fn write_rows_csv(&self, out: impl Write) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "digest", "alg", "k", "m", "sequences", "alg_cost", "alg_cost_f64", "opt_cost", "opt_cost_f64",
            "opt_max_cost", "opt_max_cost_f64", "ratio", "ratio_f64", "bound", "pass",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.digest.clone(),
                r.alg.clone(),
                r.k.to_string(),
                r.m.to_string(),
                r.sequences.to_string(),
                rational::format(&r.alg_cost),
                to_f64(&r.alg_cost).to_string(),
                rational::format(&r.opt_cost),
                to_f64(&r.opt_cost).to_string(),
                opt_str(&r.opt_max_cost),
                opt_f64(&r.opt_max_cost),
                opt_str(&r.ratio),
                opt_f64(&r.ratio),
                rational::format(&r.bound),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Hybrid findings as CSV.
    pub fn write_findings_csv(&self, out: impl Write) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["digest", "t_d", "a_d", "check", "lhs", "rhs", "slack", "slack_f64", "pass", "detail"])?;
        for f in &self.findings {
            w.write_record([
                f.digest.clone(),
                f.t_d.to_string(),
                f.a_d.to_string(),
                f.check.clone(),
                opt_str(&f.lhs),
                opt_str(&f.rhs),
                opt_str(&f.slack),
                opt_f64(&f.slack),
                f.pass.to_string(),
                f.detail.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(digest: &str, ratio: Option<Rational>, bound: i64) -> SweepRow {
        let bound = Rational::from_integer(bound);
        let mut r = SweepRow {
            digest: digest.into(),
            alg: "sd".into(),
            k: 2,
            m: 2,
            sequences: 4,
            alg_cost: Rational::from_integer(1),
            opt_cost: Rational::from_integer(1),
            opt_max_cost: None,
            ratio,
            bound,
            pass: false,
        };
        r.pass = r.within_bound();
        r
    }

    #[test]
    fn summary_recomputes_from_rows() {
        let rows = vec![row("a", Some(Rational::new(3, 2)), 3), row("b", Some(Rational::from_integer(4)), 3), row("c", None, 3)];
        let s = Summary::from_rows(&rows);
        assert_eq!((s.templates, s.sequences, s.violations), (3, 12, 2));
        assert_eq!(s.max_ratio, Some(Rational::from_integer(4)));
        assert_eq!(s.max_ratio_digest.as_deref(), Some("b"));
        assert_eq!(Summary::from_rows(&rows), s);
    }

    #[test]
    fn csv_has_exact_and_float_columns() {
        let report = SweepReport {
            config: super::super::SweepConfig::new(super::super::Family::SdTstrong),
            seed: 0,
            timestamp: None,
            summary: Summary::default(),
            rows: vec![row("a", Some(Rational::new(3, 2)), 3)],
            findings: vec![],
        };
        let mut buf = Vec::new();
        report.write_rows_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert!(line.contains(",3/2,1.5,3/1,true"), "{line}");
    }
}
