use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::HarnessError;
use crate::instance::{sequence_at, sequence_count, OnlineInstance};
use crate::metric::WeightedTree;
use crate::online::{AlgorithmName, Prepared};
use crate::oracle::{opt_cost, CostModel};
use crate::rational::{self, to_f64};
use crate::Rational;

/// Empirical ratios of one algorithm on the doubling path with `m` vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub alg: String,
    pub m: usize,
    /// Sequences evaluated (all of them, or a seeded sample).
    pub sequences: usize,
    pub exhaustive: bool,
    #[serde(with = "rational::serde_str")]
    pub worst: Rational,
    pub mean: f64,
}

/// Path `0 - 1 - .. - (m-1)` whose `i`-th edge weighs `2^i`, with a server on
/// every vertex.
pub fn doubling_path(m: usize) -> OnlineInstance {
    let edges: Vec<_> = (1..m).map(|v| (v - 1, v, Rational::from_integer(1 << (v - 1)))).collect();
    let tree = WeightedTree::from_edges(m, &edges).expect("path");
    OnlineInstance::tree_all_sites(tree, vec![0; m]).expect("unit servers")
}

/// Worst and mean `alg / Opt` on the doubling path for each size.
///
/// All `m^m` sequences are used when there are at most `sample` of them;
/// otherwise `sample` sequences are drawn with a ChaCha8 generator seeded by
/// `seed`. Sequences with zero optimum are left out of both statistics.
pub fn ratio_table(algs: &[AlgorithmName], sizes: &[usize], seed: u64, sample: usize) -> Result<Vec<RatioRow>, HarnessError> {
    let mut rows = Vec::new();
    for &m in sizes {
        let template = doubling_path(m);
        let positions: Vec<usize> = (0..m).collect();
        let total = sequence_count(m, m).filter(|&c| c <= sample);
        let indices: Vec<Vec<usize>> = match total {
            Some(c) => (0..c).map(|i| sequence_at(&positions, m, i)).collect(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ m as u64);
                (0..sample).map(|_| (0..m).map(|_| rng.random_range(0..m)).collect()).collect()
            }
        };
        for &name in algs {
            let alg = Prepared::new(name, &template)?;
            let ratios: Vec<Option<Rational>> = indices
                .par_iter()
                .map(|seq| {
                    let inst = template.with_requests(seq.clone())?;
                    let a = alg.run(&inst, false)?.total;
                    let o = opt_cost(&inst, CostModel::Metric)?;
                    Ok((o > Rational::from_integer(0)).then(|| a / o))
                })
                .collect::<Result<_, HarnessError>>()?;
            let positive: Vec<Rational> = ratios.into_iter().flatten().collect();
            let worst = positive.iter().copied().max().unwrap_or_default();
            let mean = if positive.is_empty() { 0.0 } else { positive.iter().map(to_f64).sum::<f64>() / positive.len() as f64 };
            rows.push(RatioRow { alg: name.to_string(), m, sequences: indices.len(), exhaustive: total.is_some(), worst, mean });
        }
    }
    Ok(rows)
}

pub fn write_ratio_csv(rows: &[RatioRow], out: impl Write) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alg", "m", "sequences", "exhaustive", "worst", "worst_f64", "mean_f64"])?;
    for r in rows {
        w.write_record([
            r.alg.clone(),
            r.m.to_string(),
            r.sequences.to_string(),
            r.exhaustive.to_string(),
            rational::format(&r.worst),
            to_f64(&r.worst).to_string(),
            format!("{:.6}", r.mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_algorithm_single_size_gives_one_row() {
        let rows = ratio_table(&[AlgorithmName::Sd], &[3], 1, 1000).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].sequences, 27);
        assert!(rows[0].exhaustive);
        assert!(rows[0].worst <= Rational::from_integer(8 * 3 - 5));
    }

    #[test]
    fn table_is_deterministic_under_sampling() {
        let a = ratio_table(&[AlgorithmName::Greedy, AlgorithmName::Sd], &[4], 7, 50).unwrap();
        let b = ratio_table(&[AlgorithmName::Greedy, AlgorithmName::Sd], &[4], 7, 50).unwrap();
        assert_eq!(a, b);
        assert!(!a[0].exhaustive);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_ratio_csv(&a, &mut x).unwrap();
        write_ratio_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
    }
}
