use num_traits::Zero;

use super::{MetricError, WeightedTree};
use crate::Rational;

/// One level of the SD partition of a rooted region of a tree.
///
/// `t0` is the maximal root-containing part with no heaviest edge,
/// `heavy_subtrees[i]` hangs below the heaviest edge into `heavy_roots[i]`,
/// and `side1`/`side2` split the region at the edge between the root and
/// `split_child`. All vertex lists are sorted and use the tree's indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub root: usize,
    pub vertices: Vec<usize>,
    pub max_weight: Rational,
    pub t0: Vec<usize>,
    pub heavy_roots: Vec<usize>,
    pub heavy_subtrees: Vec<Vec<usize>>,
    pub split_child: usize,
    pub side1: Vec<usize>,
    pub side2: Vec<usize>,
    /// `part[v]` is 0 for `t0`, `i + 1` for `heavy_subtrees[i]`, `usize::MAX`
    /// outside the region.
    part: Vec<usize>,
    in_side2: Vec<bool>,
}

/// Result of decomposing a region: single vertices are the recursion base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposed {
    Single(usize),
    Split(Decomposition),
}

/// Decomposes the whole tree around its root.
pub fn decompose(tree: &WeightedTree) -> Result<Decomposed, MetricError> {
    tree.check_power_of_two()?;
    decompose_region(tree, tree.root(), &vec![true; tree.len()])
}

/// Decomposes the connected region `members` of `tree`, rooted at `root`.
///
/// `root` must be the member closest to the tree root.
pub fn decompose_region(
    tree: &WeightedTree,
    root: usize,
    members: &[bool],
) -> Result<Decomposed, MetricError> {
    let n = tree.len();
    if members.len() != n || root >= n || !members[root] {
        return Err(MetricError::BadRegion);
    }
    // Preorder walk restricted to the region.
    let mut vertices = vec![root];
    let mut i = 0;
    while i < vertices.len() {
        let u = vertices[i];
        vertices.extend(tree.children(u).iter().copied().filter(|&c| members[c]));
        i += 1;
    }
    if vertices.len() != members.iter().filter(|&&m| m).count() {
        return Err(MetricError::BadRegion);
    }
    if vertices.len() == 1 {
        return Ok(Decomposed::Single(root));
    }
    let max_weight = vertices[1..]
        .iter()
        .map(|&v| tree.parent_weight(v))
        .max()
        .unwrap_or_else(Rational::zero);

    let mut part = vec![usize::MAX; n];
    let mut heavy_roots = Vec::new();
    part[root] = 0;
    // Preorder guarantees the parent is labelled before the child.
    for &v in &vertices[1..] {
        let p = tree.parent(v).unwrap();
        part[v] = if part[p] == 0 && tree.parent_weight(v) == max_weight {
            heavy_roots.push(v);
            usize::MAX - 1
        } else if part[p] == 0 {
            0
        } else {
            part[p]
        };
    }
    heavy_roots.sort_unstable();
    for (i, &h) in heavy_roots.iter().enumerate() {
        part[h] = i + 1;
    }
    // Re-label descendants now that heavy roots have their final index.
    for &v in &vertices[1..] {
        let p = tree.parent(v).unwrap();
        if part[v] != 0 && !heavy_roots.contains(&v) {
            part[v] = part[p];
        }
    }

    let split_child = tree
        .children(root)
        .iter()
        .copied()
        .find(|&c| members[c])
        .expect("region has more than one vertex");
    let mut in_side2 = vec![false; n];
    in_side2[split_child] = true;
    for &v in &vertices[1..] {
        if v != split_child && in_side2[tree.parent(v).unwrap()] {
            in_side2[v] = true;
        }
    }

    let mut sorted = vertices.clone();
    sorted.sort_unstable();
    let t0 = sorted.iter().copied().filter(|&v| part[v] == 0).collect();
    let heavy_subtrees = (1..=heavy_roots.len())
        .map(|i| sorted.iter().copied().filter(|&v| part[v] == i).collect())
        .collect();
    let side1 = sorted.iter().copied().filter(|&v| !in_side2[v]).collect();
    let side2 = sorted.iter().copied().filter(|&v| in_side2[v]).collect();

    Ok(Decomposed::Split(Decomposition {
        root,
        vertices: sorted,
        max_weight,
        t0,
        heavy_roots,
        heavy_subtrees,
        split_child,
        side1,
        side2,
        part,
        in_side2,
    }))
}

impl Decomposition {
    /// Index of the part containing `v`: 0 for `t0`, `i` for the `i`-th
    /// heavy subtree (1-based). `None` outside the region.
    pub fn part_of(&self, v: usize) -> Option<usize> {
        self.part.get(v).copied().filter(|&p| p != usize::MAX)
    }

    /// 1 or 2 for the split side containing `v`; `None` outside the region.
    pub fn side_of(&self, v: usize) -> Option<usize> {
        self.part_of(v)?;
        Some(if self.in_side2[v] { 2 } else { 1 })
    }

    /// Root of part `i` (the region root for `i == 0`).
    pub fn part_root(&self, i: usize) -> usize {
        if i == 0 {
            self.root
        } else {
            self.heavy_roots[i - 1]
        }
    }

    pub fn part_vertices(&self, i: usize) -> &[usize] {
        if i == 0 {
            &self.t0
        } else {
            &self.heavy_subtrees[i - 1]
        }
    }

    /// Root of side `j` (1 or 2).
    pub fn side_root(&self, j: usize) -> usize {
        if j == 1 {
            self.root
        } else {
            self.split_child
        }
    }

    pub fn side_vertices(&self, j: usize) -> &[usize] {
        if j == 1 {
            &self.side1
        } else {
            &self.side2
        }
    }

    /// Membership mask of `vertices` over the whole tree.
    pub fn mask(&self, vertices: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.part.len()];
        for &v in vertices {
            m[v] = true;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64) -> Rational {
        Rational::from_integer(p)
    }

    fn split(t: &WeightedTree) -> Decomposition {
        match decompose(t).unwrap() {
            Decomposed::Split(d) => d,
            Decomposed::Single(_) => panic!("expected a split"),
        }
    }

    #[test]
    fn p3_decomposition() {
        let t = WeightedTree::from_edges(3, &[(0, 1, r(1)), (1, 2, r(2))]).unwrap();
        let d = split(&t);
        assert_eq!(d.t0, vec![0, 1]);
        assert_eq!(d.heavy_roots, vec![2]);
        assert_eq!(d.heavy_subtrees, vec![vec![2]]);
        assert_eq!(d.split_child, 1);
        assert_eq!(d.side1, vec![0]);
        assert_eq!(d.side2, vec![1, 2]);
        assert_eq!(d.max_weight, r(2));
        assert_eq!(d.part_of(2), Some(1));
        assert_eq!(d.side_of(0), Some(1));
    }

    #[test]
    fn star_decomposition() {
        let t = WeightedTree::from_edges(4, &[(0, 1, r(1)), (0, 2, r(2)), (0, 3, r(2))]).unwrap();
        let d = split(&t);
        assert_eq!(d.t0, vec![0, 1]);
        assert_eq!(d.heavy_roots, vec![2, 3]);
        assert_eq!(d.heavy_subtrees, vec![vec![2], vec![3]]);
        assert_eq!(d.split_child, 1);
        assert_eq!(d.side1, vec![0, 2, 3]);
        assert_eq!(d.side2, vec![1]);
    }

    #[test]
    fn uniform_edge_and_single_vertex() {
        let t = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let d = split(&t);
        assert_eq!((d.t0.clone(), d.heavy_roots.clone(), d.side2.clone()), (vec![0], vec![1], vec![1]));
        let single = WeightedTree::from_edges(1, &[]).unwrap();
        assert_eq!(decompose(&single).unwrap(), Decomposed::Single(0));
    }

    #[test]
    fn nested_heavy_edges_stay_in_the_upper_part() {
        // 0 -2- 1 -2- 2 -1- 3 : only (0,1) borders T_0, so T_1 = {1,2,3}.
        let t = WeightedTree::from_edges(4, &[(0, 1, r(2)), (1, 2, r(2)), (2, 3, r(1))]).unwrap();
        let d = split(&t);
        assert_eq!(d.t0, vec![0]);
        assert_eq!(d.heavy_roots, vec![1]);
        assert_eq!(d.heavy_subtrees, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn rejects_bad_regions_and_weights() {
        let t = WeightedTree::from_edges(3, &[(0, 1, r(3)), (1, 2, r(2))]).unwrap();
        assert!(matches!(decompose(&t), Err(MetricError::NotPowerOfTwo { .. })));
        let t = WeightedTree::from_edges(3, &[(0, 1, r(1)), (1, 2, r(2))]).unwrap();
        // {0, 2} is disconnected.
        assert!(decompose_region(&t, 0, &[true, false, true]).is_err());
        assert!(decompose_region(&t, 1, &[true, true, true]).is_err());
    }
}
