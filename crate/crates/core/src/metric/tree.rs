use std::collections::VecDeque;

use num_traits::Zero;

use super::MetricError;
use crate::rational;
use crate::Rational;

/// A rooted tree with exact positive edge weights.
///
/// The weight of edge `(v, parent(v))` is stored on `v`. Ancestor tables for
/// binary lifting answer `lca`, path distance and max-weight distance in
/// `O(log n)`.
#[derive(Debug, Clone)]
pub struct WeightedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    weight: Vec<Rational>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    root_dist: Vec<Rational>,
    up: Vec<Vec<usize>>,
    up_max: Vec<Vec<Rational>>,
}

impl PartialEq for WeightedTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.parent == other.parent && self.weight == other.weight
    }
}

impl Eq for WeightedTree {}

impl WeightedTree {
    /// Tree on `n` vertices rooted at vertex 0.
    pub fn from_edges(n: usize, edges: &[(usize, usize, Rational)]) -> Result<Self, MetricError> {
        Self::from_edges_rooted(n, 0, edges)
    }

    pub fn from_edges_rooted(
        n: usize,
        root: usize,
        edges: &[(usize, usize, Rational)],
    ) -> Result<Self, MetricError> {
        if root >= n {
            return Err(MetricError::VertexOutOfRange { vertex: root, n });
        }
        if edges.len() + 1 != n {
            return Err(MetricError::EdgeCount { n, got: edges.len() });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(MetricError::VertexOutOfRange { vertex: x, n });
                }
            }
            if w <= Rational::zero() {
                return Err(MetricError::NonPositiveWeight { u, v });
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut parent = vec![None; n];
        let mut weight = vec![Rational::zero(); n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, w) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    weight[v] = w;
                    queue.push_back(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(MetricError::NotATree);
        }
        Ok(Self::from_parents_unchecked(root, parent, weight))
    }

    /// Builds from a parent array; `weight[v]` is the weight of `(v, parent[v])`.
    pub fn from_parents(
        root: usize,
        parent: Vec<Option<usize>>,
        weight: Vec<Rational>,
    ) -> Result<Self, MetricError> {
        let n = parent.len();
        if root >= n || weight.len() != n || parent[root].is_some() {
            return Err(MetricError::NotATree);
        }
        let edges: Vec<_> = (0..n)
            .filter_map(|v| parent[v].map(|p| (v, p, weight[v])))
            .collect();
        let tree = Self::from_edges_rooted(n, root, &edges)?;
        if tree.parent != parent {
            return Err(MetricError::NotATree);
        }
        Ok(tree)
    }

    fn from_parents_unchecked(root: usize, parent: Vec<Option<usize>>, weight: Vec<Rational>) -> Self {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        // Top-down order so parents are finalized before children.
        let mut order = Vec::with_capacity(n);
        order.push(root);
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            order.extend(children[u].iter().copied());
            i += 1;
        }
        let mut depth = vec![0; n];
        let mut root_dist = vec![Rational::zero(); n];
        for &v in &order[1..] {
            let p = parent[v].unwrap();
            depth[v] = depth[p] + 1;
            root_dist[v] = root_dist[p] + weight[v];
        }
        let levels = usize::BITS as usize - n.max(1).leading_zeros() as usize;
        let mut up = vec![(0..n).map(|v| parent[v].unwrap_or(v)).collect::<Vec<_>>()];
        let mut up_max = vec![weight.clone()];
        for k in 1..levels.max(1) {
            let prev = &up[k - 1];
            let prev_max = &up_max[k - 1];
            let next: Vec<usize> = (0..n).map(|v| prev[prev[v]]).collect();
            let next_max: Vec<Rational> = (0..n)
                .map(|v| rational::max(prev_max[v], prev_max[prev[v]]))
                .collect();
            up.push(next);
            up_max.push(next_max);
        }
        Self { root, parent, weight, children, depth, root_dist, up, up_max }
    }

    /// Same topology with every edge weight replaced by `f(weight)`.
    pub fn map_weights(&self, mut f: impl FnMut(Rational) -> Rational) -> Self {
        let weight = (0..self.len())
            .map(|v| if self.parent[v].is_some() { f(self.weight[v]) } else { Rational::zero() })
            .collect();
        Self::from_parents_unchecked(self.root, self.parent.clone(), weight)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Weight of the edge from `v` to its parent; zero for the root.
    pub fn parent_weight(&self, v: usize) -> Rational {
        self.weight[v]
    }

    /// Children of `v` in ascending index order.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Edges as `(child, parent, weight)` in ascending child order.
    pub fn edges(&self) -> Vec<(usize, usize, Rational)> {
        (0..self.len())
            .filter_map(|v| self.parent[v].map(|p| (v, p, self.weight[v])))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.len().saturating_sub(1)
    }

    /// Largest edge weight, zero for a single vertex.
    pub fn max_weight(&self) -> Rational {
        self.edges().into_iter().map(|e| e.2).max().unwrap_or_else(Rational::zero)
    }

    pub fn is_power_of_two(&self) -> bool {
        self.edges().iter().all(|e| rational::is_power_of_two(&e.2))
    }

    pub fn check_power_of_two(&self) -> Result<(), MetricError> {
        match self.edges().into_iter().find(|e| !rational::is_power_of_two(&e.2)) {
            Some((u, v, _)) => Err(MetricError::NotPowerOfTwo { u, v }),
            None => Ok(()),
        }
    }

    fn check(&self, v: usize) -> Result<(), MetricError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(MetricError::VertexOutOfRange { vertex: v, n: self.len() })
        }
    }

    /// Ancestor of `v` at depth `depth(v) - steps`.
    pub fn ancestor(&self, mut v: usize, steps: usize) -> usize {
        let mut k = 0;
        let mut s = steps;
        while s > 0 {
            if s & 1 == 1 {
                v = self.up[k][v];
            }
            s >>= 1;
            k += 1;
        }
        v
    }

    /// Binary-lifting table row `k`: the `2^k`-th ancestor of every vertex,
    /// saturating at the root.
    pub fn jump_table(&self) -> &[Vec<usize>] {
        &self.up
    }

    /// # Panics
    /// If either vertex is out of range.
    pub fn lca(&self, u: usize, v: usize) -> usize {
        let (mut u, mut v) = if self.depth[u] >= self.depth[v] { (u, v) } else { (v, u) };
        u = self.ancestor(u, self.depth[u] - self.depth[v]);
        if u == v {
            return u;
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][u] != self.up[k][v] {
                u = self.up[k][u];
                v = self.up[k][v];
            }
        }
        self.parent[u].unwrap()
    }

    pub fn checked_lca(&self, u: usize, v: usize) -> Result<usize, MetricError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.lca(u, v))
    }

    /// Sum of the weights on the unique `u`-`v` path.
    ///
    /// # Panics
    /// If either vertex is out of range.
    pub fn path_distance(&self, u: usize, v: usize) -> Rational {
        let l = self.lca(u, v);
        self.root_dist[u] + self.root_dist[v] - self.root_dist[l] * 2
    }

    pub fn checked_path_distance(&self, u: usize, v: usize) -> Result<Rational, MetricError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.path_distance(u, v))
    }

    /// Largest weight on the unique `u`-`v` path, zero when `u == v`.
    ///
    /// # Panics
    /// If either vertex is out of range.
    pub fn max_weight_distance(&self, u: usize, v: usize) -> Rational {
        let l = self.lca(u, v);
        rational::max(self.max_to_ancestor(u, l), self.max_to_ancestor(v, l))
    }

    pub fn checked_max_weight_distance(&self, u: usize, v: usize) -> Result<Rational, MetricError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.max_weight_distance(u, v))
    }

    fn max_to_ancestor(&self, mut v: usize, anc: usize) -> Rational {
        let mut steps = self.depth[v] - self.depth[anc];
        let mut best = Rational::zero();
        let mut k = 0;
        while steps > 0 {
            if steps & 1 == 1 {
                best = rational::max(best, self.up_max[k][v]);
                v = self.up[k][v];
            }
            steps >>= 1;
            k += 1;
        }
        best
    }

    /// True if `a` is an ancestor of `v` (every vertex is its own ancestor).
    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        self.depth[v] >= self.depth[a] && self.ancestor(v, self.depth[v] - self.depth[a]) == a
    }

    /// Vertices of the subtree rooted at `v`, in preorder.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            let u = out[i];
            out.extend(self.children[u].iter().copied());
            i += 1;
        }
        out
    }

    /// The subtree induced by `vertices` (which must be connected), re-indexed
    /// in the given order and rooted at `root`.
    ///
    /// Returns the new tree and the map from new to old indices.
    pub fn induced(&self, vertices: &[usize], root: usize) -> Result<(Self, Vec<usize>), MetricError> {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &v) in vertices.iter().enumerate() {
            self.check(v)?;
            index[v] = i;
        }
        if index[root] == usize::MAX {
            return Err(MetricError::BadRegion);
        }
        let edges: Vec<_> = vertices
            .iter()
            .filter_map(|&v| {
                let p = self.parent[v]?;
                (index[p] != usize::MAX).then(|| (index[v], index[p], self.weight[v]))
            })
            .collect();
        let tree = Self::from_edges_rooted(vertices.len(), index[root], &edges)?;
        Ok((tree, vertices.to_vec()))
    }

    /// Vertex set of the minimal subtree containing all of `vertices`.
    ///
    /// Returns the sorted vertex set and its topmost vertex.
    pub fn spanning_subtree(&self, vertices: &[usize]) -> (Vec<usize>, usize) {
        let top = vertices.iter().copied().reduce(|a, b| self.lca(a, b)).expect("nonempty");
        let mut inside = vec![false; self.len()];
        inside[top] = true;
        for &v in vertices {
            let mut x = v;
            while !inside[x] {
                inside[x] = true;
                x = self.parent[x].expect("top is an ancestor");
            }
        }
        let set = (0..self.len()).filter(|&v| inside[v]).collect();
        (set, top)
    }
}
