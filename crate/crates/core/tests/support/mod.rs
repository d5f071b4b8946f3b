#![allow(dead_code)]

use proptest::prelude::*;
use sdlab_core::oracle::CostModel;
use sdlab_core::{FreeSet, OnlineInstance, Rational, WeightedTree};

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// Random labeled tree rooted at 0: vertex `v > 0` hangs below a uniform
/// earlier vertex with weight `2^e`, `e <= max_exp`.
pub fn pow2_tree(max_n: usize, max_exp: u32) -> impl Strategy<Value = WeightedTree> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            let parents: Vec<_> = (1..n).map(|v| 0..v).collect();
            let exps = proptest::collection::vec(0..=max_exp, n - 1);
            (Just(n), parents, exps)
        })
        .prop_map(|(n, parents, exps)| {
            let edges: Vec<_> =
                parents.iter().zip(&exps).enumerate().map(|(i, (&p, &e))| (p, i + 1, int(1 << e))).collect();
            WeightedTree::from_edges(n, &edges).unwrap()
        })
}

pub fn free_from_mask(n: usize, mask: u64) -> FreeSet {
    let mut f = FreeSet::new(n);
    for v in (0..n).filter(|v| mask >> v & 1 == 1) {
        f.insert(v);
    }
    f
}

/// Optimal cost by trying every capacity-respecting assignment.
pub fn brute_force_opt(inst: &OnlineInstance, model: CostModel) -> Rational {
    fn go(inst: &OnlineInstance, model: CostModel, t: usize, left: &mut [u32], acc: Rational, best: &mut Option<Rational>) {
        if best.is_some_and(|b| acc >= b) {
            return;
        }
        if t == inst.requests.len() {
            *best = Some(acc);
            return;
        }
        for j in 0..inst.sites.len() {
            if left[j] > 0 {
                left[j] -= 1;
                let c = model.distance(&inst.geometry, inst.requests[t], inst.sites[j]);
                go(inst, model, t + 1, left, acc + c, best);
                left[j] += 1;
            }
        }
    }
    let mut best = None;
    go(inst, model, 0, &mut inst.capacities.clone(), int(0), &mut best);
    best.expect("total capacity covers the requests")
}

fn grow(tree: &WeightedTree, set: &[bool], from: usize, keep: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut out = vec![false; tree.len()];
    let mut stack = vec![from];
    out[from] = true;
    while let Some(u) = stack.pop() {
        for &c in tree.children(u) {
            if set[c] && !out[c] && keep(c) {
                out[c] = true;
                stack.push(c);
            }
        }
    }
    out
}

/// Straightforward recursive Subtree-Decomposition. Every part is rebuilt
/// from scratch at each call; `ρ^(2)` is the first child of the root inside
/// the current subtree.
pub fn naive_sd(tree: &WeightedTree, request: usize, free: &FreeSet) -> Option<usize> {
    if free.is_empty() {
        return None;
    }
    Some(naive_rec(tree, &vec![true; tree.len()], tree.root(), request, free))
}

fn naive_rec(tree: &WeightedTree, set: &[bool], root: usize, r: usize, free: &FreeSet) -> usize {
    let verts: Vec<usize> = (0..tree.len()).filter(|&v| set[v]).collect();
    if verts.len() == 1 {
        return verts[0];
    }
    let wmax = verts.iter().filter(|&&v| v != root).map(|&v| tree.parent_weight(v)).max().unwrap();
    let t0 = grow(tree, set, root, |c| tree.parent_weight(c) < wmax);
    let heavy: Vec<usize> = verts.iter().copied().filter(|&v| !t0[v] && tree.parent(v).is_some_and(|p| t0[p])).collect();
    let sub = |x: usize| grow(tree, set, x, |_| true);
    let (ti, rho_i) = if t0[r] {
        (t0.clone(), root)
    } else {
        let h = *heavy.iter().find(|&&h| tree.is_ancestor(h, r)).unwrap();
        (sub(h), h)
    };
    let has_free = |s: &[bool]| (0..tree.len()).any(|v| s[v] && free.contains(v));
    let rho2 = *tree.children(root).iter().find(|&&c| set[c]).unwrap();
    let t2 = sub(rho2);
    let t1: Vec<bool> = (0..tree.len()).map(|v| set[v] && !t2[v]).collect();

    if has_free(&t0) {
        if has_free(&ti) {
            naive_rec(tree, &ti, rho_i, r, free)
        } else {
            naive_rec(tree, &t0, root, tree.parent(rho_i).unwrap(), free)
        }
    } else if has_free(&ti) {
        naive_rec(tree, &ti, rho_i, r, free)
    } else {
        let (own, own_root, other, other_root) = if t2[r] { (t2, rho2, t1, root) } else { (t1, root, t2, rho2) };
        if has_free(&own) {
            naive_rec(tree, &own, own_root, r, free)
        } else {
            naive_rec(tree, &other, other_root, other_root, free)
        }
    }
}
