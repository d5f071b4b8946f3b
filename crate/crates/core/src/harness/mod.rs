//! Sweeps, reports and timing used by the `sdlab` command-line driver.
//!
//! A sweep runs one [`Family`] of instances, evaluates every request
//! sequence of every template exactly, and collects one [`SweepRow`] per
//! template (its worst sequence) or, for the hybrid family, one
//! [`Finding`] per inequality check and per failed check.

mod bench;
mod families;
mod properties;
mod report;
mod table;

use std::str::FromStr;

use serde::Serialize;

pub use bench::{bench_sd, uniform_path, BenchRow};
pub use families::{hybrid_cases, random_valid_spec, sweep_cases, Case, HybridCase};
pub use report::CheckTally;
pub use properties::{four_point_sweep, mpfs_exhaustive, sandwich_sweep, PropertyTally};
pub use report::{Finding, Summary, SweepReport, SweepRow};
pub use table::{doubling_path, ratio_table, write_ratio_csv, RatioRow};

use crate::hybrid::HybridError;
use crate::instance::{InstanceError, OnlineInstance};
use crate::online::OnlineError;
use crate::oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{what} = {value} exceeds the limit {limit}; pass --unsafe-large to lift it")]
    Guard { what: &'static str, value: usize, limit: usize },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Largest tree size allowed in exhaustive families without `unsafe_large`.
pub const MAX_TREE_N: usize = 5;
/// Longest request sequence allowed in exhaustive families without
/// `unsafe_large`.
pub const MAX_SEQUENCE_K: usize = 6;

/// The instance families behind the bound checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// SD on every small power-of-two tree against `(3k - 3) Opt_max`.
    SdTstrong,
    /// B* on random metrics with requests on sites against `(4k - 3) Opt`.
    BstarOmms,
    /// B* with capacities and off-site requests against `(8m - 5) Opt`.
    PipelineOtr,
    /// Hybrid checkers on exhaustive and random SD hybrids.
    HybridLemmas,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::SdTstrong, Family::BstarOmms, Family::PipelineOtr, Family::HybridLemmas];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::SdTstrong => "sd-tstrong",
            Family::BstarOmms => "bstar-omms",
            Family::PipelineOtr => "pipeline-otr",
            Family::HybridLemmas => "hybrid-lemmas",
        }
    }
}

impl FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| HarnessError::UnknownFamily(s.to_string()))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of a sweep.
///
/// * `sd-tstrong`: every labeled tree with `2..=max_n` vertices (and at
///   most `max_k`), edge weights in {1, 2, 4}, `k = n`.
/// * `bstar-omms`: `cases` random metrics, `k` cycling through
///   `2..=max_k`, servers on every point.
/// * `pipeline-otr`: `cases` random instances with `m` cycling through
///   {2, 3}, `k` through `3..=max_k`, two extra off-site points and random
///   capacities. Every point may be requested.
/// * `hybrid-lemmas`: every labeled tree with `2..=max_n` vertices and
///   weights in {1, 2}, all sequences and decoupling choices, plus `cases`
///   random hybrids on trees with at most six vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub family: Family,
    pub max_n: usize,
    pub max_k: usize,
    pub seed: u64,
    pub cases: usize,
    pub unsafe_large: bool,
}

impl SweepConfig {
    pub fn new(family: Family) -> Self {
        let (max_n, max_k, cases) = match family {
            Family::SdTstrong => (4, 4, 0),
            Family::BstarOmms => (4, 4, 201),
            Family::PipelineOtr => (5, 5, 102),
            Family::HybridLemmas => (3, 6, 10_000),
        };
        Self { family, max_n, max_k, seed: 0, cases, unsafe_large: false }
    }

    pub fn check_guards(&self) -> Result<(), HarnessError> {
        if self.unsafe_large {
            return Ok(());
        }
        if self.max_n > MAX_TREE_N {
            return Err(HarnessError::Guard { what: "max-n", value: self.max_n, limit: MAX_TREE_N });
        }
        if self.max_k > MAX_SEQUENCE_K {
            return Err(HarnessError::Guard { what: "max-k", value: self.max_k, limit: MAX_SEQUENCE_K });
        }
        Ok(())
    }
}

/// A finished sweep: the report plus up to [`MAX_WITNESSES`] instances that
/// violated a bound or check.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: SweepReport,
    pub witnesses: Vec<OnlineInstance>,
}

pub const MAX_WITNESSES: usize = 16;

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.report.summary.violations == 0
    }
}

/// Runs the sweep described by `config` on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome, HarnessError> {
    config.check_guards()?;
    match config.family {
        Family::HybridLemmas => families::run_hybrid_sweep(config),
        _ => families::run_bound_sweep(config),
    }
}
