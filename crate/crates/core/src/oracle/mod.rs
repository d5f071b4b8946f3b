//! Exact offline optima and exhaustive worst-case ratio search.

mod flow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use flow::{certify_assignment, min_cost_assignment};

use crate::instance::{sequence_at, sequence_count, Geometry, InstanceError, OnlineInstance};
use crate::online::{run_policy, Mpfs, OnlineError};
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("cost model {0} needs a tree geometry")]
    NeedsTree(CostModel),
    #[error("capacities cannot absorb every request")]
    Infeasible,
    #[error("{count} sequences exceed the search guard {limit}")]
    TooLarge { count: String, limit: usize },
    #[error("sequence {sequence:?} has zero optimal cost but the algorithm pays {alg}")]
    ZeroOpt { sequence: Vec<usize>, alg: Rational },
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Distance used to price an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostModel {
    /// The instance metric (path distance on trees).
    Metric,
    /// Tree path distance.
    TreePath,
    /// Largest edge weight on the tree path.
    TreeMaxWeight,
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostModel::Metric => "metric",
            CostModel::TreePath => "tree-path",
            CostModel::TreeMaxWeight => "tree-max-weight",
        })
    }
}

impl CostModel {
    /// Checks that the model applies to `geometry`.
    pub fn check(self, geometry: &Geometry) -> Result<(), OracleError> {
        match (self, geometry) {
            (CostModel::TreePath | CostModel::TreeMaxWeight, Geometry::Metric(_)) => Err(OracleError::NeedsTree(self)),
            _ => Ok(()),
        }
    }

    /// # Panics
    /// If the model needs a tree and `geometry` is not one.
    pub fn distance(self, geometry: &Geometry, u: usize, v: usize) -> Rational {
        match (self, geometry) {
            (CostModel::Metric, g) => g.dist(u, v),
            (CostModel::TreePath, Geometry::Tree(t)) => t.path_distance(u, v),
            (CostModel::TreeMaxWeight, Geometry::Tree(t)) => t.max_weight_distance(u, v),
            (_, Geometry::Metric(_)) => panic!("cost model {self} needs a tree"),
        }
    }
}

/// An optimal offline assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptSolution {
    pub cost: Rational,
    /// Site (point index) serving each request.
    pub sites: Vec<usize>,
    /// Whether the residual-network optimality certificate holds.
    pub certified: bool,
}

pub fn opt_solution(inst: &OnlineInstance, model: CostModel) -> Result<OptSolution, OracleError> {
    model.check(&inst.geometry)?;
    let costs: Vec<Vec<Rational>> = inst
        .requests
        .iter()
        .map(|&r| inst.sites.iter().map(|&s| model.distance(&inst.geometry, r, s)).collect())
        .collect();
    let (cost, cols) = min_cost_assignment(&costs, &inst.capacities).ok_or(OracleError::Infeasible)?;
    let certified = certify_assignment(&costs, &inst.capacities, &cols);
    Ok(OptSolution { cost, sites: cols.iter().map(|&j| inst.sites[j]).collect(), certified })
}

/// Minimum total cost of serving every request within the capacities.
pub fn opt_cost(inst: &OnlineInstance, model: CostModel) -> Result<Rational, OracleError> {
    Ok(opt_solution(inst, model)?.cost)
}

/// Result of an exhaustive ratio search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorstCase {
    /// Largest `alg / opt` over sequences with positive optimum; 0 if none.
    pub ratio: Rational,
    /// Lexicographically first sequence attaining `ratio`.
    pub witness: Option<Vec<usize>>,
    pub evaluated: usize,
    /// Sequences where both costs are zero.
    pub skipped: usize,
}

/// Default guard on the number of sequences searched.
pub const SEARCH_LIMIT: usize = 2_000_000;

/// Maximizes `alg(num) / opt(den)` over every request sequence of length
/// `Σ capacities` drawn from `positions`, keeping the geometry, sites and
/// capacities of `template`.
///
/// Sequences are evaluated in parallel; the result does not depend on the
/// schedule.
pub fn worst_case_ratio<M: Mpfs + ?Sized>(
    template: &OnlineInstance,
    positions: &[usize],
    alg: &M,
    num: CostModel,
    den: CostModel,
    limit: usize,
) -> Result<WorstCase, OracleError> {
    num.check(&template.geometry)?;
    den.check(&template.geometry)?;
    let k: usize = template.capacities.iter().map(|&c| c as usize).sum();
    let count = sequence_count(positions.len(), k)
        .filter(|&c| c <= limit)
        .ok_or_else(|| OracleError::TooLarge { count: format!("{}^{}", positions.len(), k), limit })?;

    let eval = |index: usize| -> Result<Option<(Rational, usize)>, OracleError> {
        let seq = sequence_at(positions, k, index);
        let inst = template.with_requests(seq.clone())?;
        let trace = run_policy(&inst, alg.policy().as_mut(), false)?;
        let a = trace.cost_under(|r, s| num.distance(&inst.geometry, r, s));
        let o = opt_cost(&inst, den)?;
        if o == Rational::from_integer(0) {
            if a == o {
                return Ok(None);
            }
            return Err(OracleError::ZeroOpt { sequence: seq, alg: a });
        }
        Ok(Some((a / o, index)))
    };
    type Acc = (Option<(Rational, usize)>, usize, usize);
    let merge = |x: Acc, y: Acc| -> Acc {
        let best = match (x.0, y.0) {
            (Some(a), Some(b)) => Some(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
            (a, b) => a.or(b),
        };
        (best, x.1 + y.1, x.2 + y.2)
    };
    let (best, evaluated, skipped) = (0..count)
        .into_par_iter()
        .map(|i| eval(i).map(|r| (r, 1, usize::from(r.is_none()))))
        .try_reduce(|| (None, 0, 0), |a, b| Ok(merge(a, b)))?;
    Ok(WorstCase {
        ratio: best.map_or_else(|| Rational::from_integer(0), |b| b.0),
        witness: best.map(|b| sequence_at(positions, k, b.1)),
        evaluated,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::WeightedTree;
    use crate::online::SdSelector;

    fn r(p: i64) -> Rational {
        Rational::from_integer(p)
    }

    fn p3() -> WeightedTree {
        WeightedTree::from_edges(3, &[(0, 1, r(1)), (1, 2, r(2))]).unwrap()
    }

    #[test]
    fn opt_examples_on_p3() {
        let inst = OnlineInstance::tree_all_sites(p3(), vec![2, 2, 2]).unwrap();
        assert_eq!(opt_cost(&inst, CostModel::TreePath).unwrap(), r(5));
        assert_eq!(opt_cost(&inst, CostModel::TreeMaxWeight).unwrap(), r(4));
        assert_eq!(opt_cost(&inst, CostModel::Metric).unwrap(), r(5));
        let sol = opt_solution(&inst, CostModel::TreePath).unwrap();
        assert!(sol.certified);
        let mut used = sol.sites.clone();
        used.sort_unstable();
        assert_eq!(used, vec![0, 1, 2]);
        let perm = inst.with_requests(vec![2, 0, 1]).unwrap();
        for model in [CostModel::Metric, CostModel::TreePath, CostModel::TreeMaxWeight] {
            assert_eq!(opt_cost(&perm, model).unwrap(), r(0));
        }
    }

    #[test]
    fn tree_models_need_trees() {
        let inst = OnlineInstance::tree_all_sites(p3(), vec![0, 1, 2]).unwrap();
        let metric = OnlineInstance { geometry: Geometry::Metric(inst.geometry.to_metric()), ..inst };
        assert!(matches!(opt_cost(&metric, CostModel::TreePath), Err(OracleError::NeedsTree(_))));
        assert_eq!(opt_cost(&metric, CostModel::Metric).unwrap(), r(0));
    }

    #[test]
    fn worst_case_on_p2_and_single_site() {
        let p2 = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p2.clone(), vec![0, 0]).unwrap();
        let sd = SdSelector::new(p2).unwrap();
        let w = worst_case_ratio(&inst, &[0, 1], &sd, CostModel::TreePath, CostModel::TreeMaxWeight, 100).unwrap();
        assert_eq!((w.ratio, w.witness, w.evaluated, w.skipped), (r(1), Some(vec![0, 0]), 4, 2));

        let one = WeightedTree::from_edges(1, &[]).unwrap();
        let inst = OnlineInstance::tree_all_sites(one.clone(), vec![0]).unwrap();
        let sd = SdSelector::new(one).unwrap();
        let w = worst_case_ratio(&inst, &[0], &sd, CostModel::TreePath, CostModel::TreeMaxWeight, 100).unwrap();
        assert_eq!((w.ratio, w.witness), (r(0), None));
    }

    #[test]
    fn worst_case_on_p3_respects_the_bound() {
        let inst = OnlineInstance::tree_all_sites(p3(), vec![0, 0, 0]).unwrap();
        let sd = SdSelector::new(p3()).unwrap();
        let w = worst_case_ratio(&inst, &[0, 1, 2], &sd, CostModel::TreePath, CostModel::TreeMaxWeight, 100).unwrap();
        assert_eq!(w.evaluated, 27);
        assert!(w.ratio <= r(6));
        assert!(w.ratio > r(1));
        let seq = w.witness.unwrap();
        let again = inst.with_requests(seq).unwrap();
        let alg = crate::online::run_online(&again, &sd).unwrap().total;
        assert_eq!(alg / opt_cost(&again, CostModel::TreeMaxWeight).unwrap(), w.ratio);
        assert!(worst_case_ratio(&inst, &[0, 1, 2], &sd, CostModel::TreePath, CostModel::TreeMaxWeight, 10).is_err());
    }
}
