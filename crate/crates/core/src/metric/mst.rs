use num_traits::One;

use super::{MetricError, MetricSpace, WeightedTree};
use crate::rational;

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.parent[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        true
    }
}

/// Minimum spanning tree of the complete graph on `space`, rooted at 0.
///
/// Kruskal over edges ordered by `(weight, min endpoint, max endpoint)`,
/// so the result is deterministic under ties.
pub fn mst_of_metric(space: &MetricSpace) -> WeightedTree {
    let n = space.len();
    let mut candidates: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (space.dist(i, j), i, j))
        .collect();
    candidates.sort();
    let mut sets = DisjointSets::new(n);
    let edges: Vec<_> = candidates
        .into_iter()
        .filter(|&(_, i, j)| sets.union(i, j))
        .map(|(w, i, j)| (i, j, w))
        .collect();
    WeightedTree::from_edges(n.max(1), &edges).expect("Kruskal yields a spanning tree")
}

/// Rounds every weight `w >= 1` up to the least `2^i >= w`.
pub fn round_to_power_of_two(tree: &WeightedTree) -> Result<WeightedTree, MetricError> {
    if let Some((u, v, _)) = tree.edges().into_iter().find(|e| e.2 < crate::Rational::one()) {
        return Err(MetricError::WeightBelowOne { u, v });
    }
    Ok(tree.map_weights(|w| rational::ceil_power_of_two(&w).expect("checked above").1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn three_points() -> MetricSpace {
        let z = Rational::zero();
        MetricSpace::new(vec![
            vec![z, r(1, 1), r(2, 1)],
            vec![r(1, 1), z, r(3, 2)],
            vec![r(2, 1), r(3, 2), z],
        ])
        .unwrap()
    }

    fn edge_set(t: &WeightedTree) -> Vec<(usize, usize, Rational)> {
        let mut e: Vec<_> = t.edges().into_iter().map(|(a, b, w)| (a.min(b), a.max(b), w)).collect();
        e.sort();
        e
    }

    #[test]
    fn three_point_mst_matches_enumeration() {
        // The three spanning trees of K3 weigh 1+3/2, 1+2, 3/2+2.
        let t = mst_of_metric(&three_points());
        assert_eq!(edge_set(&t), vec![(0, 1, r(1, 1)), (1, 2, r(3, 2))]);
        assert_eq!(t.root(), 0);
    }

    #[test]
    fn trivial_msts() {
        let one = MetricSpace::new(vec![vec![Rational::zero()]]).unwrap();
        assert_eq!(mst_of_metric(&one).len(), 1);
        let z = Rational::zero();
        let two = MetricSpace::new(vec![vec![z, r(5, 1)], vec![r(5, 1), z]]).unwrap();
        assert_eq!(edge_set(&mst_of_metric(&two)), vec![(0, 1, r(5, 1))]);
    }

    #[test]
    fn mst_ties_break_by_endpoints() {
        // Uniform metric: every spanning star/path has the same weight.
        let n = 4;
        let d: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational::zero() } else { r(1, 1) }).collect())
            .collect();
        let t = mst_of_metric(&MetricSpace::new(d).unwrap());
        assert_eq!(edge_set(&t), vec![(0, 1, r(1, 1)), (0, 2, r(1, 1)), (0, 3, r(1, 1))]);
    }

    #[test]
    fn rounding_examples() {
        let t = WeightedTree::from_edges(3, &[(0, 1, r(1, 1)), (1, 2, r(3, 2))]).unwrap();
        let rounded = round_to_power_of_two(&t).unwrap();
        assert_eq!(rounded.parent_weight(1), r(1, 1));
        assert_eq!(rounded.parent_weight(2), r(2, 1));

        let t = WeightedTree::from_edges(2, &[(0, 1, r(4, 1))]).unwrap();
        assert_eq!(round_to_power_of_two(&t).unwrap().parent_weight(1), r(4, 1));

        let t = WeightedTree::from_edges(4, &[(0, 1, r(1, 1)), (1, 2, r(3, 1)), (2, 3, r(5, 1))])
            .unwrap();
        let w: Vec<_> = round_to_power_of_two(&t).unwrap().edges().iter().map(|e| e.2).collect();
        assert_eq!(w, vec![r(1, 1), r(4, 1), r(8, 1)]);
        assert!(round_to_power_of_two(&t).unwrap().is_power_of_two());

        let t = WeightedTree::from_edges(2, &[(0, 1, r(1, 2))]).unwrap();
        assert!(matches!(round_to_power_of_two(&t), Err(MetricError::WeightBelowOne { .. })));
    }
}
