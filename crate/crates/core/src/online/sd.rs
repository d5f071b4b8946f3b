use std::collections::HashMap;

use super::{FreeSet, Mpfs, OnlinePolicy};
use crate::metric::{decompose_region, Decomposed, MetricError, WeightedTree};

/// Fenwick tree of free-server counts over Euler positions.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<i32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, pos: usize, delta: i32) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, end: usize) -> i32 {
        let mut i = end;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    fn range(&self, start: usize, end: usize) -> i32 {
        if start >= end {
            0
        } else {
            self.prefix(end) - self.prefix(start)
        }
    }
}

/// A connected region of the tree: `x` together with the subtrees of the
/// forest at `lvl` hanging below children of `x` with index `>= b`.
///
/// The forest at level `l` keeps the edges whose weight is among the `l`
/// smallest distinct weights. The non-root members occupy the contiguous
/// Euler positions `start..tout[lvl][x]` of that forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Region {
    x: u32,
    lvl: u16,
    b: u32,
    start: u32,
}

/// Subtree-Decomposition on a power-of-two weighted tree with a server on
/// every vertex.
///
/// Each selection walks the recursion of the algorithm, one sub-call per
/// loop iteration, with region membership and free-server tests answered in
/// `O(log n)` from per-level Euler tours and Fenwick trees.
#[derive(Debug, Clone)]
pub struct SdSelector {
    tree: WeightedTree,
    sites: Vec<usize>,
    levels: usize,
    tin: Vec<Vec<u32>>,
    tout: Vec<Vec<u32>>,
    kid_off: Vec<Vec<u32>>,
    kids: Vec<Vec<u32>>,
}

/// Free servers of an [`SdSelector`], indexed for fast region counts.
#[derive(Debug, Clone)]
pub struct FreeIndex {
    free: Vec<bool>,
    count: usize,
    fen: Vec<Fenwick>,
}

impl SdSelector {
    pub fn new(tree: WeightedTree) -> Result<Self, MetricError> {
        tree.check_power_of_two()?;
        let n = tree.len();
        let mut weights: Vec<_> = tree.edges().into_iter().map(|e| e.2).collect();
        weights.sort_unstable();
        weights.dedup();
        let levels = weights.len();
        let edge_level: Vec<usize> = (0..n)
            .map(|v| match tree.parent(v) {
                Some(_) => 1 + weights.binary_search(&tree.parent_weight(v)).expect("weight present"),
                None => 0,
            })
            .collect();

        let mut tin = Vec::with_capacity(levels + 1);
        let mut tout = Vec::with_capacity(levels + 1);
        let mut kid_off = Vec::with_capacity(levels + 1);
        let mut kids = Vec::with_capacity(levels + 1);
        for lvl in 0..=levels {
            let kept = |v: usize| tree.parent(v).is_some() && edge_level[v] <= lvl;
            let mut off = Vec::with_capacity(n + 1);
            let mut list = Vec::new();
            for v in 0..n {
                off.push(list.len() as u32);
                list.extend(tree.children(v).iter().filter(|&&c| kept(c)).map(|&c| c as u32));
            }
            off.push(list.len() as u32);

            let mut t_in = vec![0u32; n];
            let mut order = Vec::with_capacity(n);
            let mut stack = Vec::new();
            for r in (0..n).filter(|&v| !kept(v)) {
                stack.push(r as u32);
                while let Some(u) = stack.pop() {
                    t_in[u as usize] = order.len() as u32;
                    order.push(u);
                    let (a, b) = (off[u as usize] as usize, off[u as usize + 1] as usize);
                    stack.extend(list[a..b].iter().rev());
                }
            }
            let mut size = vec![1u32; n];
            for &u in order.iter().rev() {
                let u = u as usize;
                if kept(u) {
                    let p = tree.parent(u).unwrap();
                    size[p] += size[u];
                }
            }
            let t_out = (0..n).map(|v| t_in[v] + size[v]).collect();
            tin.push(t_in);
            tout.push(t_out);
            kid_off.push(off);
            kids.push(list);
        }
        Ok(Self { sites: (0..n).collect(), tree, levels, tin, tout, kid_off, kids })
    }

    pub fn tree(&self) -> &WeightedTree {
        &self.tree
    }

    /// A free-server index with every vertex in `free` marked free.
    pub fn index(&self, free: &FreeSet) -> FreeIndex {
        let n = self.tree.len();
        let mut idx = FreeIndex {
            free: vec![false; n],
            count: 0,
            fen: (0..=self.levels).map(|_| Fenwick::new(n)).collect(),
        };
        for v in free.iter() {
            self.mark(&mut idx, v, true);
        }
        idx
    }

    /// Marks `v` free or full in `idx`.
    pub fn mark(&self, idx: &mut FreeIndex, v: usize, free: bool) {
        if idx.free[v] == free {
            return;
        }
        idx.free[v] = free;
        let delta = if free { 1 } else { -1 };
        idx.count = (idx.count as i64 + i64::from(delta)) as usize;
        for (lvl, fen) in idx.fen.iter_mut().enumerate() {
            fen.add(self.tin[lvl][v] as usize, delta);
        }
    }

    fn kids_of(&self, lvl: usize, x: usize) -> &[u32] {
        let off = &self.kid_off[lvl];
        &self.kids[lvl][off[x] as usize..off[x + 1] as usize]
    }

    fn region(&self, x: usize, lvl: usize, b: usize) -> Region {
        let kids = self.kids_of(lvl, x);
        let i = kids.partition_point(|&c| (c as usize) < b);
        let start = match kids.get(i) {
            Some(&c) => self.tin[lvl][c as usize],
            None => self.tout[lvl][x],
        };
        Region { x: x as u32, lvl: lvl as u16, b: b as u32, start }
    }

    fn size(&self, reg: Region) -> u32 {
        1 + self.tout[reg.lvl as usize][reg.x as usize] - reg.start
    }

    /// The same vertex set at the lowest level that still contains it, so
    /// that `lvl` names the heaviest weight inside the region.
    fn normalize(&self, reg: Region) -> Region {
        let target = self.size(reg);
        let (x, b) = (reg.x as usize, reg.b as usize);
        let (mut lo, mut hi) = (0usize, reg.lvl as usize);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.size(self.region(x, mid, b)) == target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo == reg.lvl as usize {
            reg
        } else {
            self.region(x, lo, b)
        }
    }

    fn contains(&self, reg: Region, v: usize) -> bool {
        let lvl = reg.lvl as usize;
        v == reg.x as usize || (reg.start..self.tout[lvl][reg.x as usize]).contains(&self.tin[lvl][v])
    }

    fn has_free(&self, idx: &FreeIndex, reg: Region) -> bool {
        let lvl = reg.lvl as usize;
        idx.free[reg.x as usize]
            || idx.fen[lvl].range(reg.start as usize, self.tout[lvl][reg.x as usize] as usize) > 0
    }

    /// Highest ancestor of `r` strictly below `x` that lies outside `t0`.
    fn heavy_root_above(&self, r: usize, x: usize, lvl: usize, t0: Region) -> usize {
        let kids = self.kids_of(lvl, x);
        let pos = self.tin[lvl][r];
        let i = kids.partition_point(|&c| self.tin[lvl][c as usize] <= pos);
        if let Some(&c) = i.checked_sub(1).and_then(|i| kids.get(i)) {
            if !self.contains(t0, c as usize) {
                return c as usize;
            }
        }
        let up = self.tree.jump_table();
        let dx = self.tree.depth(x);
        let mut u = r;
        for k in (0..up.len()).rev() {
            let a = up[k][u];
            if self.tree.depth(a) > dx && !self.contains(t0, a) {
                u = a;
            }
        }
        u
    }

    /// The server chosen for `request` given the free servers in `idx`.
    pub fn select_indexed(&self, request: usize, idx: &FreeIndex) -> Option<usize> {
        if idx.count == 0 {
            return None;
        }
        let mut r = request;
        let mut reg = self.region(self.tree.root(), self.levels, 0);
        loop {
            reg = self.normalize(reg);
            let (x, lvl, b) = (reg.x as usize, reg.lvl as usize, reg.b as usize);
            if lvl == 0 {
                return Some(x);
            }
            let t0 = self.region(x, lvl - 1, b);
            let heavy = (!self.contains(t0, r)).then(|| {
                let rho = self.heavy_root_above(r, x, lvl, t0);
                (rho, self.region(rho, lvl, 0))
            });
            let c = self.kids_of(lvl, x)[self.kids_of(lvl, x).partition_point(|&c| (c as usize) < b)] as usize;
            let side2 = self.region(c, lvl, 0);
            let side1 = self.region(x, lvl, c + 1);
            if self.has_free(idx, t0) {
                match heavy {
                    None => reg = t0,
                    Some((_, ti)) if self.has_free(idx, ti) => reg = ti,
                    Some((rho, _)) => {
                        r = self.tree.parent(rho).expect("heavy root has a parent");
                        reg = t0;
                    }
                }
            } else {
                let (own, other, other_root) =
                    if self.contains(side2, r) { (side2, side1, x) } else { (side1, side2, c) };
                match heavy {
                    Some((_, ti)) if self.has_free(idx, ti) => reg = ti,
                    _ if self.has_free(idx, own) => reg = own,
                    _ => {
                        r = other_root;
                        reg = other;
                    }
                }
            }
        }
    }
}

impl Mpfs for SdSelector {
    fn name(&self) -> &str {
        "sd"
    }

    fn num_points(&self) -> usize {
        self.tree.len()
    }

    fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Obtained by running the selection rule with all servers free and
    /// removing each chosen server in turn.
    fn preference_list(&self, request: usize) -> Vec<usize> {
        let n = self.tree.len();
        let mut idx = self.index(&FreeSet::from_sites(n, &self.sites));
        let mut out = Vec::with_capacity(n);
        while let Some(s) = self.select_indexed(request, &idx) {
            out.push(s);
            self.mark(&mut idx, s, false);
        }
        out
    }

    fn select(&self, request: usize, free: &FreeSet) -> Option<usize> {
        self.select_indexed(request, &self.index(free))
    }

    fn policy(&self) -> Box<dyn OnlinePolicy + '_> {
        Box::new(SdPolicy { sd: self, idx: None })
    }
}

/// Stateful runner that keeps the free-server index up to date between
/// requests instead of rebuilding it.
pub struct SdPolicy<'a> {
    sd: &'a SdSelector,
    idx: Option<FreeIndex>,
}

impl OnlinePolicy for SdPolicy<'_> {
    fn assign(&mut self, request: usize, free: &FreeSet) -> Option<usize> {
        let sd = self.sd;
        let idx = self.idx.get_or_insert_with(|| sd.index(free));
        sd.select_indexed(request, idx)
    }

    fn on_full(&mut self, site: usize) {
        if let Some(idx) = self.idx.as_mut() {
            self.sd.mark(idx, site, false);
        }
    }
}

/// SD selection computed directly on explicit decompositions, one recursive
/// call per sub-algorithm. Slow; used as an independent reference.
pub fn sd_select_explicit(tree: &WeightedTree, request: usize, free: &FreeSet) -> Option<usize> {
    if free.is_empty() {
        return None;
    }
    let mut members = vec![true; tree.len()];
    let mut root = tree.root();
    let mut r = request;
    loop {
        let d = match decompose_region(tree, root, &members).expect("valid region") {
            Decomposed::Single(v) => return Some(v),
            Decomposed::Split(d) => d,
        };
        let any_free = |vs: &[usize]| vs.iter().any(|&v| free.contains(v));
        let i = d.part_of(r).expect("request inside region");
        let j = d.side_of(r).unwrap();
        let (next_root, next_set, next_r) = if any_free(&d.t0) {
            if any_free(d.part_vertices(i)) {
                (d.part_root(i), d.part_vertices(i), r)
            } else {
                (d.root, d.part_vertices(0), tree.parent(d.part_root(i)).unwrap())
            }
        } else if i > 0 && any_free(d.part_vertices(i)) {
            (d.part_root(i), d.part_vertices(i), r)
        } else if any_free(d.side_vertices(j)) {
            (d.side_root(j), d.side_vertices(j), r)
        } else {
            (d.side_root(3 - j), d.side_vertices(3 - j), d.side_root(3 - j))
        };
        members = d.mask(next_set);
        root = next_root;
        r = next_r;
    }
}

type PrefMemo = HashMap<(usize, usize, Vec<bool>), Vec<usize>>;

/// The SD preference list of `request` over all vertices, built by
/// concatenating the preference lists of the sub-algorithms.
pub fn sd_preference_list(tree: &WeightedTree, request: usize) -> Vec<usize> {
    let mut memo = PrefMemo::new();
    pref(tree, tree.root(), &vec![true; tree.len()], request, &mut memo)
}

fn pref(tree: &WeightedTree, root: usize, members: &[bool], r: usize, memo: &mut PrefMemo) -> Vec<usize> {
    let key = (root, r, members.to_vec());
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let d = match decompose_region(tree, root, members).expect("valid region") {
        Decomposed::Single(v) => return vec![v],
        Decomposed::Split(d) => d,
    };
    let i = d.part_of(r).expect("request inside region");
    let j = d.side_of(r).unwrap();
    let mut sub = |part_root: usize, set: &[usize], req: usize| pref(tree, part_root, &d.mask(set), req, memo);
    let mut out = Vec::with_capacity(d.vertices.len());
    if i > 0 {
        out.extend(sub(d.part_root(i), d.part_vertices(i), r));
        out.extend(sub(d.root, &d.t0, tree.parent(d.part_root(i)).unwrap()));
    } else {
        out.extend(sub(d.root, &d.t0, r));
    }
    let own = sub(d.side_root(j), d.side_vertices(j), r);
    let other = sub(d.side_root(3 - j), d.side_vertices(3 - j), d.side_root(3 - j));
    let outside = |v: &usize| d.part_of(*v) != Some(0) && (i == 0 || d.part_of(*v) != Some(i));
    out.extend(own.into_iter().filter(outside));
    out.extend(other.into_iter().filter(|v| d.part_of(*v) != Some(0)));
    memo.insert(key, out.clone());
    out
}
