use std::time::Instant;

use serde::Serialize;

use super::HarnessError;
use crate::instance::OnlineInstance;
use crate::metric::WeightedTree;
use crate::online::{run_policy, Mpfs, OnlineError, SdSelector};
use crate::Rational;

/// Timing of SD on one uniform path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub runs: usize,
    pub median_ns: u128,
    pub min_ns: u128,
    pub max_ns: u128,
    pub per_request_ns: f64,
}

/// Path with `n` unit edges, a server on every vertex and all `n` requests
/// at the far end `n - 1`.
pub fn uniform_path(n: usize) -> OnlineInstance {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v, Rational::from_integer(1))).collect();
    let tree = WeightedTree::from_edges(n, &edges).expect("path");
    OnlineInstance::tree_all_sites(tree, vec![n - 1; n]).expect("unit servers")
}

/// Times `runs` full SD runs on [`uniform_path`]`(n)` after one untimed
/// warm-up run. Building the selector is not timed.
pub fn bench_sd(n: usize, runs: usize) -> Result<BenchRow, HarnessError> {
    let inst = uniform_path(n.max(1));
    let sd = SdSelector::new(inst.geometry.as_tree().expect("path").clone()).map_err(OnlineError::from)?;
    std::hint::black_box(run_policy(&inst, sd.policy().as_mut(), false)?);
    let mut times: Vec<u128> = Vec::with_capacity(runs);
    for _ in 0..runs.max(1) {
        let start = Instant::now();
        let trace = run_policy(&inst, sd.policy().as_mut(), false)?;
        times.push(start.elapsed().as_nanos());
        std::hint::black_box(trace);
    }
    times.sort_unstable();
    let median = times[times.len() / 2];
    Ok(BenchRow {
        n,
        runs: times.len(),
        median_ns: median,
        min_ns: times[0],
        max_ns: times[times.len() - 1],
        per_request_ns: median as f64 / inst.k() as f64,
    })
}
