//! Hybrid algorithms: an MPFS algorithm that deviates once, at a chosen
//! time, to a chosen server. Cavities, hybrid cycles and the checkers for
//! their structural properties live here.

mod checks;
mod constructions;
mod sd;

use num_traits::Zero;
use serde::Serialize;

pub use checks::{check_cavity_steps, check_cycle_cost_bound};
pub use constructions::{check_conjugate, check_partial_cycles, check_well_behaved, conjugate_of, partial_cycle_of, well_behaved_of};
pub use sd::{check_confinement, check_first_cavity_weight, check_main_bound, check_simulation, sd_hybrid_suite};

use crate::instance::OnlineInstance;
use crate::online::{AssignmentTrace, FreeSet, Mpfs, OnlineError, Step};
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum HybridError {
    #[error("hybrid runs need unit capacities")]
    Capacities,
    #[error("decoupling time {t_d} outside 1..={k}")]
    Time { t_d: usize, k: usize },
    #[error("decoupling server {0} is not a site")]
    Server(usize),
    #[error("free sets at time {t} differ by {h:?} / {a:?}, not by one server each")]
    CavityStructure { t: usize, h: Vec<usize>, a: Vec<usize> },
    #[error("the hybrid instance is not valid")]
    Invalid,
    #[error(transparent)]
    Online(#[from] OnlineError),
}

/// `(A, t_d, a_d)`: follow `A`, except that request `t_d` (1-based) goes to
/// `a_d` if it is free at that moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HybridSpec {
    pub t_d: usize,
    pub a_d: usize,
}

/// Side-by-side record of a base run and its hybrid.
///
/// Times are 1-based as in the request sequence; `h[t - t_d]` and
/// `a[t - t_d]` are the hybrid and base cavities at time `t` for
/// `t_d <= t <= t_c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CavityTrace {
    pub valid: bool,
    pub t_d: usize,
    pub a_d: usize,
    pub t_c: usize,
    pub h: Vec<usize>,
    pub a: Vec<usize>,
    /// Free sets of the base run after each step.
    pub free_a: Vec<FreeSet>,
    /// Free sets of the hybrid run after each step.
    pub free_h: Vec<FreeSet>,
}

impl CavityTrace {
    pub fn h_at(&self, t: usize) -> usize {
        self.h[t - self.t_d]
    }

    pub fn a_at(&self, t: usize) -> usize {
        self.a[t - self.t_d]
    }

    /// All cavities, sorted and deduplicated.
    pub fn cavities(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.h.iter().chain(&self.a).copied().collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Length of the hybrid cycle `h_td -> .. -> h_tc -> a_tc -> .. -> a_td -> h_td`.
    pub fn ring_length(&self, mut d: impl FnMut(usize, usize) -> Rational) -> Rational {
        if !self.valid {
            return Rational::zero();
        }
        let last = self.h.len() - 1;
        let mut total = d(self.h[0], self.a[0]) + d(self.h[last], self.a[last]);
        for i in 1..=last {
            total += d(self.h[i - 1], self.h[i]) + d(self.a[i - 1], self.a[i]);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridRun {
    pub trace_a: AssignmentTrace,
    pub trace_h: AssignmentTrace,
    pub cav: CavityTrace,
}

/// Length of the closed walk through `points` in order.
pub fn ring(points: &[usize], mut d: impl FnMut(usize, usize) -> Rational) -> Rational {
    match points {
        [] => Rational::zero(),
        [first, .., last] => d(*first, *last) + points.windows(2).map(|w| d(w[0], w[1])).sum::<Rational>(),
        [_] => Rational::zero(),
    }
}

fn run_with(
    inst: &OnlineInstance,
    alg: &(impl Mpfs + ?Sized),
    force: Option<HybridSpec>,
) -> Result<(AssignmentTrace, Vec<FreeSet>), HybridError> {
    let mut free = FreeSet::from_sites(inst.n(), &inst.sites);
    let mut steps = Vec::with_capacity(inst.k());
    let mut snaps = Vec::with_capacity(inst.k());
    let mut total = Rational::zero();
    for (i, &r) in inst.requests.iter().enumerate() {
        let t = i + 1;
        let site = match force {
            Some(spec) if spec.t_d == t && free.contains(spec.a_d) => spec.a_d,
            _ => alg.select(r, &free).ok_or(OnlineError::NoFreeSite { step: i })?,
        };
        free.remove(site);
        let cost = inst.geometry.dist(r, site);
        total += cost;
        steps.push(Step { request: r, site, cost, free_after: Some(free.to_vec()) });
        snaps.push(free.clone());
    }
    Ok((AssignmentTrace { steps, total }, snaps))
}

/// Runs `alg` and its hybrid `(alg, t_d, a_d)` on `inst` and extracts the
/// cavities from the differences of the two free sets.
///
/// Fails with [`HybridError::CavityStructure`] if the free sets ever
/// differ by anything other than one server on each side, or differ again
/// after coinciding.
pub fn run_hybrid(
    inst: &OnlineInstance,
    alg: &(impl Mpfs + ?Sized),
    spec: HybridSpec,
) -> Result<HybridRun, HybridError> {
    let k = inst.k();
    if !inst.has_unit_capacities() {
        return Err(HybridError::Capacities);
    }
    if spec.t_d == 0 || spec.t_d > k {
        return Err(HybridError::Time { t_d: spec.t_d, k });
    }
    if !inst.sites.contains(&spec.a_d) {
        return Err(HybridError::Server(spec.a_d));
    }
    let (trace_a, free_a) = run_with(inst, alg, None)?;
    let (trace_h, free_h) = run_with(inst, alg, Some(spec))?;
    let valid = free_a[spec.t_d - 1].contains(spec.a_d);
    let mut cav = CavityTrace { valid, t_d: spec.t_d, a_d: spec.a_d, t_c: 0, h: vec![], a: vec![], free_a, free_h };
    let mut coupled = !valid;
    for t in spec.t_d..=k {
        let (fa, fh) = (&cav.free_a[t - 1], &cav.free_h[t - 1]);
        let only_h: Vec<usize> = fh.iter().filter(|&v| !fa.contains(v)).collect();
        let only_a: Vec<usize> = fa.iter().filter(|&v| !fh.contains(v)).collect();
        let broken = || HybridError::CavityStructure { t, h: only_h.clone(), a: only_a.clone() };
        match (only_h.as_slice(), only_a.as_slice()) {
            ([], []) => {
                if !coupled {
                    coupled = true;
                    cav.t_c = t - 1;
                }
            }
            ([h], [a]) if !coupled => {
                cav.h.push(*h);
                cav.a.push(*a);
            }
            _ => return Err(broken()),
        }
    }
    if valid && (!coupled || cav.h.is_empty()) {
        return Err(HybridError::CavityStructure { t: k, h: vec![], a: vec![] });
    }
    Ok(HybridRun { trace_a, trace_h, cav })
}

/// Which structural property a [`Check`] tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Free sets differ by exactly one cavity each until they coincide.
    CavityUniqueness,
    /// Per-step movement rules of the cavities.
    CavitySteps,
    /// Cost difference bounded by the hybrid cycle length.
    CycleCost,
    /// Cycle length bounded by the cavity subtree potential.
    MainBound,
    /// Max-weight distance of the first cavities equals the heaviest edge
    /// of the cavity subtree.
    FirstCavityWeight,
    /// Cavities stay in the part holding both first cavities.
    Confinement,
    /// A smaller instance on a subtree reproduces the cavities and cycle.
    Simulation,
    /// Swapping the decoupling server swaps the cavity sequences.
    Conjugate,
    /// The compressed instance keeps the cavity movement.
    WellBehaved,
    /// Sub-walks of the hybrid cavities form hybrid cycles of their own.
    PartialCycle,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::CavityUniqueness => "cavity-uniqueness",
            CheckKind::CavitySteps => "cavity-steps",
            CheckKind::CycleCost => "cycle-cost",
            CheckKind::MainBound => "main-bound",
            CheckKind::FirstCavityWeight => "first-cavity-weight",
            CheckKind::Confinement => "confinement",
            CheckKind::Simulation => "simulation",
            CheckKind::Conjugate => "conjugate",
            CheckKind::WellBehaved => "well-behaved",
            CheckKind::PartialCycle => "partial-cycle",
        }
    }
}

/// Outcome of one property check on one hybrid instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub kind: CheckKind,
    pub pass: bool,
    /// For inequalities `lhs <= rhs`, both sides.
    pub bound: Option<(Rational, Rational)>,
    pub detail: String,
}

impl Check {
    pub fn holds(kind: CheckKind, pass: bool, detail: impl Into<String>) -> Self {
        Self { kind, pass, bound: None, detail: detail.into() }
    }

    pub fn inequality(kind: CheckKind, lhs: Rational, rhs: Rational) -> Self {
        Self { kind, pass: lhs <= rhs, bound: Some((lhs, rhs)), detail: String::new() }
    }

    pub fn slack(&self) -> Option<Rational> {
        self.bound.map(|(l, r)| r - l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::WeightedTree;
    use crate::online::SdSelector;

    fn r(p: i64) -> Rational {
        Rational::from_integer(p)
    }

    fn p2_run() -> HybridRun {
        let p2 = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p2.clone(), vec![0, 0]).unwrap();
        run_hybrid(&inst, &SdSelector::new(p2).unwrap(), HybridSpec { t_d: 1, a_d: 1 }).unwrap()
    }

    #[test]
    fn p2_hybrid_example() {
        let run = p2_run();
        let cav = &run.cav;
        assert!(cav.valid);
        assert_eq!((cav.t_c, cav.h.clone(), cav.a.clone()), (1, vec![0], vec![1]));
        assert_eq!((run.trace_a.total, run.trace_h.total), (r(1), r(1)));
        assert_eq!(run.trace_h.assignments(), vec![1, 0]);
        assert_eq!(cav.ring_length(|_, _| r(1)), r(2));
        assert_eq!(cav.cavities(), vec![0, 1]);
    }

    #[test]
    fn choosing_the_base_server_is_invalid() {
        let p2 = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p2.clone(), vec![0, 0]).unwrap();
        let run = run_hybrid(&inst, &SdSelector::new(p2).unwrap(), HybridSpec { t_d: 1, a_d: 0 }).unwrap();
        assert!(!run.cav.valid);
        assert_eq!(run.trace_a, run.trace_h);
        assert_eq!(run.cav.ring_length(|_, _| r(1)), r(0));
    }

    #[test]
    fn p3_hybrid_example() {
        let p3 = WeightedTree::from_edges(3, &[(0, 1, r(1)), (1, 2, r(2))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p3.clone(), vec![2, 2, 2]).unwrap();
        let run = run_hybrid(&inst, &SdSelector::new(p3.clone()).unwrap(), HybridSpec { t_d: 1, a_d: 1 }).unwrap();
        let cav = &run.cav;
        assert!(cav.valid);
        assert_eq!((cav.h[0], cav.a[0]), (2, 1));
        // A: 2, 1, 0. H: 1, 2, 0. Free sets agree once both extras are used.
        assert_eq!(run.trace_h.assignments(), vec![1, 2, 0]);
        assert_eq!((cav.t_c, cav.h.clone(), cav.a.clone()), (1, vec![2], vec![1]));
        assert_eq!(cav.ring_length(|u, v| p3.path_distance(u, v)), r(4));
    }

    #[test]
    fn rejects_bad_specs() {
        let p2 = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p2.clone(), vec![0, 0]).unwrap();
        let sd = SdSelector::new(p2).unwrap();
        assert!(matches!(run_hybrid(&inst, &sd, HybridSpec { t_d: 0, a_d: 1 }), Err(HybridError::Time { .. })));
        assert!(matches!(run_hybrid(&inst, &sd, HybridSpec { t_d: 3, a_d: 1 }), Err(HybridError::Time { .. })));
        assert!(matches!(run_hybrid(&inst, &sd, HybridSpec { t_d: 1, a_d: 5 }), Err(HybridError::Server(5))));
    }

    #[test]
    fn ring_of_points() {
        let d = |u: usize, v: usize| r((u as i64 - v as i64).abs());
        assert_eq!(ring(&[0, 3, 1], d), r(3 + 2 + 1));
        assert_eq!(ring(&[4], d), r(0));
        assert_eq!(ring(&[], d), r(0));
    }
}
