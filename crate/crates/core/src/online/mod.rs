//! Online assignment: the MPFS framework, Subtree-Decomposition, the
//! greedy and Permutation baselines and the nearest-site lifting used by B*.

mod baselines;
mod lift;
mod sd;

use std::str::FromStr;

use num_traits::Zero;

pub use baselines::{Greedy, PermutationPolicy};
pub use lift::{build_bstar, lift_nearest_site, BStar, Lifted};
pub use sd::{sd_preference_list, sd_select_explicit, FreeIndex, SdPolicy, SdSelector};

use crate::instance::{Geometry, OnlineInstance};
use crate::metric::MetricError;
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum OnlineError {
    #[error("unknown algorithm {0:?} (expected sd, greedy, permutation or bstar)")]
    UnknownAlgorithm(String),
    #[error("{alg} cannot run on this instance: {reason}")]
    NotApplicable { alg: &'static str, reason: &'static str },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("no free site for request {step}")]
    NoFreeSite { step: usize },
    #[error("request {step} was assigned to {site}, which is not free")]
    NotFree { step: usize, site: usize },
    #[error("request {step} at free site {request} was assigned elsewhere ({site})")]
    CoLocation { step: usize, request: usize, site: usize },
    #[error("algorithm expects {expected} points, instance has {actual}")]
    PointCount { expected: usize, actual: usize },
}

/// A set of free sites, stored as a membership mask over point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeSet {
    member: Vec<bool>,
    len: usize,
}

impl FreeSet {
    /// The empty set over `n` points.
    pub fn new(n: usize) -> Self {
        Self { member: vec![false; n], len: 0 }
    }

    pub fn from_sites(n: usize, sites: &[usize]) -> Self {
        let mut set = Self::new(n);
        for &s in sites {
            set.insert(s);
        }
        set
    }

    pub fn contains(&self, v: usize) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: usize) {
        if !self.member[v] {
            self.member[v] = true;
            self.len += 1;
        }
    }

    pub fn remove(&mut self, v: usize) {
        if self.member[v] {
            self.member[v] = false;
            self.len -= 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of points the mask ranges over.
    pub fn universe(&self) -> usize {
        self.member.len()
    }

    /// Free sites in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &f)| f).map(|(v, _)| v)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &FreeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

/// An algorithm that ranks sites for each request position once and for
/// all and sends every request to its most preferred free site.
pub trait Mpfs: Send + Sync {
    fn name(&self) -> &str;

    /// Number of points a request may occupy.
    fn num_points(&self) -> usize;

    fn sites(&self) -> &[usize];

    /// All sites, most preferred first.
    fn preference_list(&self, request: usize) -> Vec<usize>;

    fn select(&self, request: usize, free: &FreeSet) -> Option<usize> {
        self.preference_list(request).into_iter().find(|&s| free.contains(s))
    }

    /// A runner for one pass over a request sequence.
    fn policy(&self) -> Box<dyn OnlinePolicy + '_> {
        Box::new(MpfsPolicy(self))
    }
}

/// One online pass: receives each request with the current free sites.
pub trait OnlinePolicy {
    fn assign(&mut self, request: usize, free: &FreeSet) -> Option<usize>;

    /// Called when `site` runs out of capacity.
    fn on_full(&mut self, _site: usize) {}

    /// Whether a request on a free site is always served there.
    fn serves_co_located(&self) -> bool {
        true
    }
}

struct MpfsPolicy<'a, M: ?Sized>(&'a M);

impl<M: Mpfs + ?Sized> OnlinePolicy for MpfsPolicy<'_, M> {
    fn assign(&mut self, request: usize, free: &FreeSet) -> Option<usize> {
        self.0.select(request, free)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub request: usize,
    pub site: usize,
    pub cost: Rational,
    /// Sites with spare capacity after this step, when recorded.
    pub free_after: Option<Vec<usize>>,
}

/// Record of an online run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentTrace {
    pub steps: Vec<Step>,
    pub total: Rational,
}

impl AssignmentTrace {
    pub fn assignments(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.site).collect()
    }

    /// Total cost of the same assignment under another distance.
    pub fn cost_under(&self, mut d: impl FnMut(usize, usize) -> Rational) -> Rational {
        self.steps.iter().map(|s| d(s.request, s.site)).sum()
    }
}

/// Runs an MPFS algorithm with free-set snapshots recorded at each step.
pub fn run_online<M: Mpfs + ?Sized>(inst: &OnlineInstance, alg: &M) -> Result<AssignmentTrace, OnlineError> {
    if alg.num_points() != inst.n() {
        return Err(OnlineError::PointCount { expected: alg.num_points(), actual: inst.n() });
    }
    run_policy(inst, alg.policy().as_mut(), true)
}

/// Processes the requests of `inst` left to right with `policy`.
///
/// A site stays free while its assignment count is below its capacity.
pub fn run_policy(
    inst: &OnlineInstance,
    policy: &mut dyn OnlinePolicy,
    snapshots: bool,
) -> Result<AssignmentTrace, OnlineError> {
    let n = inst.n();
    let mut remaining = vec![0u32; n];
    for (&s, &c) in inst.sites.iter().zip(&inst.capacities) {
        remaining[s] = c;
    }
    let mut free = FreeSet::from_sites(n, &inst.sites);
    let co_located = policy.serves_co_located();
    let mut steps = Vec::with_capacity(inst.k());
    let mut total = Rational::zero();
    for (step, &request) in inst.requests.iter().enumerate() {
        let site = policy.assign(request, &free).ok_or(OnlineError::NoFreeSite { step })?;
        if !free.contains(site) {
            return Err(OnlineError::NotFree { step, site });
        }
        if co_located && free.contains(request) && site != request {
            return Err(OnlineError::CoLocation { step, request, site });
        }
        remaining[site] -= 1;
        if remaining[site] == 0 {
            free.remove(site);
            policy.on_full(site);
        }
        let cost = inst.geometry.dist(request, site);
        total += cost;
        steps.push(Step { request, site, cost, free_after: snapshots.then(|| free.to_vec()) });
    }
    Ok(AssignmentTrace { steps, total })
}

/// Algorithm names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmName {
    Sd,
    Greedy,
    Permutation,
    BStar,
}

impl AlgorithmName {
    pub const ALL: [AlgorithmName; 4] =
        [AlgorithmName::Sd, AlgorithmName::Greedy, AlgorithmName::Permutation, AlgorithmName::BStar];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmName::Sd => "sd",
            AlgorithmName::Greedy => "greedy",
            AlgorithmName::Permutation => "permutation",
            AlgorithmName::BStar => "bstar",
        }
    }
}

impl FromStr for AlgorithmName {
    type Err = OnlineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| OnlineError::UnknownAlgorithm(s.to_string()))
    }
}

impl std::fmt::Display for AlgorithmName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// SD on the instance tree, which must carry a server on every vertex.
pub fn sd_for(inst: &OnlineInstance) -> Result<SdSelector, OnlineError> {
    let tree = match &inst.geometry {
        Geometry::Tree(t) => t,
        Geometry::Metric(_) => {
            return Err(OnlineError::NotApplicable { alg: "sd", reason: "needs a tree geometry" })
        }
    };
    if inst.m() != inst.n() {
        return Err(OnlineError::NotApplicable { alg: "sd", reason: "needs a site on every vertex" });
    }
    Ok(SdSelector::new(tree.clone())?)
}

/// A named algorithm built once for a fixed geometry and site set, ready to
/// serve many request sequences.
pub enum Prepared {
    Sd(SdSelector),
    Greedy(Greedy),
    BStar(BStar),
    Permutation(PermutationPolicy),
}

impl Prepared {
    /// Builds `name` for the geometry and sites of `inst`.
    pub fn new(name: AlgorithmName, inst: &OnlineInstance) -> Result<Self, OnlineError> {
        Ok(match name {
            AlgorithmName::Sd => Prepared::Sd(sd_for(inst)?),
            AlgorithmName::Greedy => Prepared::Greedy(Greedy::new(&inst.geometry, &inst.sites)),
            AlgorithmName::BStar => Prepared::BStar(build_bstar(&inst.geometry.to_metric(), &inst.sites)?),
            AlgorithmName::Permutation => {
                if !inst.has_unit_capacities() {
                    return Err(OnlineError::NotApplicable { alg: "permutation", reason: "needs unit capacities" });
                }
                Prepared::Permutation(PermutationPolicy::new(&inst.geometry, &inst.sites))
            }
        })
    }

    /// Serves `inst`, which must share the geometry and sites used to build
    /// `self`.
    pub fn run(&self, inst: &OnlineInstance, snapshots: bool) -> Result<AssignmentTrace, OnlineError> {
        match self {
            Prepared::Sd(alg) => run_policy(inst, alg.policy().as_mut(), snapshots),
            Prepared::Greedy(alg) => run_policy(inst, alg.policy().as_mut(), snapshots),
            Prepared::BStar(alg) => run_policy(inst, alg.policy().as_mut(), snapshots),
            Prepared::Permutation(p) => run_policy(inst, &mut p.clone(), snapshots),
        }
    }
}

/// Runs the named algorithm on `inst`.
pub fn run_named(name: AlgorithmName, inst: &OnlineInstance, snapshots: bool) -> Result<AssignmentTrace, OnlineError> {
    Prepared::new(name, inst)?.run(inst, snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::WeightedTree;

    fn r(p: i64) -> Rational {
        Rational::from_integer(p)
    }

    fn p3() -> WeightedTree {
        WeightedTree::from_edges(3, &[(0, 1, r(1)), (1, 2, r(2))]).unwrap()
    }

    #[test]
    fn sd_runs_on_p3_and_p2() {
        let inst = OnlineInstance::tree_all_sites(p3(), vec![2, 2, 2]).unwrap();
        let sd = SdSelector::new(p3()).unwrap();
        let trace = run_online(&inst, &sd).unwrap();
        assert_eq!(trace.assignments(), vec![2, 1, 0]);
        assert_eq!(trace.steps.iter().map(|s| s.cost).collect::<Vec<_>>(), vec![r(0), r(2), r(3)]);
        assert_eq!(trace.total, r(5));
        assert_eq!(trace.steps[0].free_after, Some(vec![0, 1]));
        assert_eq!(run_named(AlgorithmName::Sd, &inst, false).unwrap().total, r(5));

        let p2 = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p2.clone(), vec![0, 0]).unwrap();
        let trace = run_online(&inst, &SdSelector::new(p2).unwrap()).unwrap();
        assert_eq!((trace.assignments(), trace.total), (vec![0, 1], r(1)));
    }

    #[test]
    fn permutation_of_sites_costs_nothing() {
        let inst = OnlineInstance::tree_all_sites(p3(), vec![1, 2, 0]).unwrap();
        for name in AlgorithmName::ALL {
            let trace = run_named(name, &inst, true).unwrap();
            assert_eq!(trace.total, r(0), "{name}");
            assert_eq!(trace.assignments(), vec![1, 2, 0]);
        }
    }

    #[test]
    fn trace_free_sets_shrink_by_assignment() {
        let inst = OnlineInstance::tree_all_sites(p3(), vec![0, 0, 2]).unwrap();
        let trace = run_named(AlgorithmName::Greedy, &inst, true).unwrap();
        let mut free = vec![0, 1, 2];
        for step in &trace.steps {
            free.retain(|&s| s != step.site);
            assert_eq!(step.free_after.as_ref().unwrap(), &free);
        }
        assert_eq!(trace.total, trace.steps.iter().map(|s| s.cost).sum::<Rational>());
    }

    #[test]
    fn names_parse() {
        assert_eq!("bstar".parse::<AlgorithmName>().unwrap(), AlgorithmName::BStar);
        assert!(matches!("nosuch".parse::<AlgorithmName>(), Err(OnlineError::UnknownAlgorithm(_))));
    }

    #[test]
    fn free_set_basics() {
        let mut f = FreeSet::from_sites(5, &[1, 3]);
        assert_eq!((f.len(), f.contains(3), f.contains(9)), (2, true, false));
        f.remove(3);
        f.remove(3);
        f.insert(4);
        assert_eq!(f.to_vec(), vec![1, 4]);
        assert!(FreeSet::from_sites(5, &[4]).is_subset(&f));
        assert_eq!(f.universe(), 5);
    }
}
