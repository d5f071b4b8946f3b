use super::{FreeSet, Mpfs, OnlinePolicy};
use crate::instance::Geometry;
use crate::oracle::min_cost_assignment;
use crate::Rational;

/// Nearest free site, ties to the lower site index.
#[derive(Debug, Clone)]
pub struct Greedy {
    sites: Vec<usize>,
    prefs: Vec<Vec<usize>>,
}

impl Greedy {
    pub fn new(geometry: &Geometry, sites: &[usize]) -> Self {
        let prefs = (0..geometry.len())
            .map(|r| {
                let mut order = sites.to_vec();
                order.sort_by_key(|&s| (geometry.dist(r, s), s));
                order
            })
            .collect();
        Self { sites: sites.to_vec(), prefs }
    }
}

impl Mpfs for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn num_points(&self) -> usize {
        self.prefs.len()
    }

    fn sites(&self) -> &[usize] {
        &self.sites
    }

    fn preference_list(&self, request: usize) -> Vec<usize> {
        self.prefs[request].clone()
    }
}

/// The Permutation algorithm for unit capacities.
///
/// After `t` requests the set `P_t` of used sites is the site set of an
/// optimal matching of `r_1..r_t`. Request `r_t` goes to the free site `s`
/// minimizing the optimal matching cost of `r_1..r_t` onto `P_{t-1} ∪ {s}`,
/// the lowest such `s` on ties.
#[derive(Debug, Clone)]
pub struct PermutationPolicy {
    dist: Vec<Vec<Rational>>,
    history: Vec<usize>,
    used: Vec<usize>,
}

impl PermutationPolicy {
    pub fn new(geometry: &Geometry, sites: &[usize]) -> Self {
        let dist = (0..geometry.len())
            .map(|r| (0..geometry.len()).map(|s| if sites.contains(&s) { geometry.dist(r, s) } else { Rational::default() }).collect())
            .collect();
        Self { dist, history: Vec::new(), used: Vec::new() }
    }
}

impl OnlinePolicy for PermutationPolicy {
    fn assign(&mut self, request: usize, free: &FreeSet) -> Option<usize> {
        self.history.push(request);
        let mut best: Option<(Rational, usize)> = None;
        for s in free.iter() {
            let cols: Vec<usize> = self.used.iter().copied().chain(std::iter::once(s)).collect();
            let costs: Vec<Vec<Rational>> =
                self.history.iter().map(|&r| cols.iter().map(|&c| self.dist[r][c]).collect()).collect();
            let (cost, _) = min_cost_assignment(&costs, &vec![1; cols.len()]).expect("square assignment");
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, s));
            }
        }
        let (_, s) = best?;
        self.used.push(s);
        Some(s)
    }

    fn serves_co_located(&self) -> bool {
        false
    }
}
