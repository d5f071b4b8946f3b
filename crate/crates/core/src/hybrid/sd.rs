use num_traits::Zero;

use super::{
    check_cavity_steps, check_conjugate, check_cycle_cost_bound, check_partial_cycles, check_well_behaved, run_hybrid, Check,
    CheckKind, HybridError, HybridRun, HybridSpec,
};
use crate::instance::OnlineInstance;
use crate::metric::{decompose, Decomposed, WeightedTree};
use crate::online::{Mpfs, SdSelector};
use crate::Rational;

/// Vertices, top vertex and heaviest edge weight of the minimal subtree
/// spanning all cavities.
fn cavity_subtree(tree: &WeightedTree, run: &HybridRun) -> (Vec<usize>, usize, Rational) {
    let (vertices, top) = tree.spanning_subtree(&run.cav.cavities());
    let w_max = vertices.iter().filter(|&&v| v != top).map(|&v| tree.parent_weight(v)).max().unwrap_or_else(Rational::zero);
    (vertices, top, w_max)
}

/// `ring <= 2 |E| w_max - 2 d(lca(h, a_d), top)` over the cavity subtree.
pub fn check_main_bound(tree: &WeightedTree, run: &HybridRun) -> Check {
    if !run.cav.valid {
        return Check::inequality(CheckKind::MainBound, Rational::zero(), Rational::zero());
    }
    let (vertices, top, w_max) = cavity_subtree(tree, run);
    let edges = Rational::from_integer(vertices.len() as i64 - 1);
    let lca = tree.lca(run.cav.h[0], run.cav.a_d);
    let rhs = edges * w_max * 2 - tree.path_distance(lca, top) * 2;
    let lhs = run.cav.ring_length(|u, v| tree.path_distance(u, v));
    Check::inequality(CheckKind::MainBound, lhs, rhs)
}

/// The max-weight distance between the first two cavities equals the
/// heaviest edge of the cavity subtree.
pub fn check_first_cavity_weight(tree: &WeightedTree, run: &HybridRun) -> Check {
    if !run.cav.valid {
        return Check::holds(CheckKind::FirstCavityWeight, true, "");
    }
    let (_, _, w_max) = cavity_subtree(tree, run);
    let got = tree.max_weight_distance(run.cav.h[0], run.cav.a_d);
    let mut c = Check::holds(CheckKind::FirstCavityWeight, got == w_max, "");
    c.bound = Some((got, w_max));
    c
}

/// If the first two cavities share a part of the top-level decomposition,
/// every cavity is in that part; if they share a side and no cavity is in
/// the root part, every cavity is on that side.
pub fn check_confinement(tree: &WeightedTree, run: &HybridRun) -> Result<Check, HybridError> {
    let kind = CheckKind::Confinement;
    let cav = &run.cav;
    let dec = match decompose(tree).map_err(|e| HybridError::Online(e.into()))? {
        Decomposed::Split(d) if cav.valid => d,
        _ => return Ok(Check::holds(kind, true, "not applicable")),
    };
    let all = cav.cavities();
    let (h, a) = (cav.h[0], cav.a_d);
    let part = dec.part_of(h).filter(|&p| Some(p) == dec.part_of(a));
    if let Some(i) = part {
        let pass = all.iter().all(|&v| dec.part_of(v) == Some(i));
        return Ok(Check::holds(kind, pass, format!("part {i}")));
    }
    let side = dec.side_of(h).filter(|&j| Some(j) == dec.side_of(a));
    if let Some(j) = side {
        if all.iter().all(|&v| dec.part_of(v) != Some(0)) {
            let pass = all.iter().all(|&v| dec.side_of(v) == Some(j));
            return Ok(Check::holds(kind, pass, format!("side {j}")));
        }
    }
    Ok(Check::holds(kind, true, "not applicable"))
}

type EntryFn<'a> = &'a dyn Fn(usize, &SdSelector, &[usize]) -> Option<usize>;

/// Replays a well-behaved SD hybrid on the subtree `region` rooted at
/// `root`. Prefix requests outside the region are dropped and later
/// requests outside it are moved by `entry`.
fn simulate_on(
    sd: &SdSelector,
    inst: &OnlineInstance,
    run: &HybridRun,
    region: &[usize],
    root: usize,
    entry: EntryFn<'_>,
) -> Result<Result<(), String>, HybridError> {
    let tree = sd.tree();
    let (sub, old) = tree.induced(region, root).map_err(|e| HybridError::Online(e.into()))?;
    let sub_sd = SdSelector::new(sub.clone()).map_err(|e| HybridError::Online(e.into()))?;
    let mut new = vec![usize::MAX; tree.len()];
    for (i, &v) in old.iter().enumerate() {
        new[v] = i;
    }
    let cav = &run.cav;
    let mut requests = Vec::new();
    for (t, &r) in inst.requests.iter().enumerate() {
        if new[r] != usize::MAX {
            requests.push(new[r]);
        } else if t + 1 >= cav.t_d {
            match entry(r, &sub_sd, &old) {
                Some(u) => requests.push(u),
                None => return Ok(Err(format!("no entry vertex for request {r}"))),
            }
        }
    }
    let kept_prefix = requests.len() - (inst.k() + 1 - cav.t_d);
    let spec = HybridSpec { t_d: kept_prefix + 1, a_d: new[cav.a_d] };
    let sub_inst = OnlineInstance::tree_all_sites(sub.clone(), requests).map_err(|_| HybridError::Invalid)?;
    let sim = run_hybrid(&sub_inst, &sub_sd, spec)?.cav;
    let h: Vec<usize> = sim.h.iter().map(|&v| old[v]).collect();
    let a: Vec<usize> = sim.a.iter().map(|&v| old[v]).collect();
    if !sim.valid || h != cav.h || a != cav.a {
        return Ok(Err(format!("simulated cavities {h:?}/{a:?}")));
    }
    let ring_t = cav.ring_length(|u, v| tree.path_distance(u, v));
    let ring_u = sim.ring_length(|u, v| sub.path_distance(u, v));
    if ring_t != ring_u {
        return Ok(Err(format!("cycle length {ring_u} on the subtree, {ring_t} on the tree")));
    }
    Ok(Ok(()))
}

/// The region vertex whose preference list on the region equals the
/// request's preference list on the whole tree filtered to the region.
fn entry_vertex(sd: &SdSelector, r: usize, sub_sd: &SdSelector, old: &[usize]) -> Option<usize> {
    let mut new = vec![usize::MAX; sd.tree().len()];
    for (i, &v) in old.iter().enumerate() {
        new[v] = i;
    }
    let filtered: Vec<usize> = sd.preference_list(r).into_iter().filter(|&v| new[v] != usize::MAX).map(|v| new[v]).collect();
    (0..old.len()).find(|&u| sub_sd.preference_list(u) == filtered)
}

/// Checks that a smaller SD instance on the appropriate subtree reproduces
/// the cavities and cycle length of a well-behaved SD hybrid.
///
/// Every subtree `T_{-i}` whose removed part holds no cavity is tried, with
/// requests in the removed part moved to the parent of its root. When all
/// cavities lie in one part, or on one side with none in the root part, the
/// hybrid is replayed on that subtree with outside requests moved to an
/// entry vertex found by search.
pub fn check_simulation(sd: &SdSelector, inst: &OnlineInstance, run: &HybridRun) -> Result<Check, HybridError> {
    let kind = CheckKind::Simulation;
    let tree = sd.tree();
    let dec = match decompose(tree).map_err(|e| HybridError::Online(e.into()))? {
        Decomposed::Split(d) if run.cav.valid => d,
        _ => return Ok(Check::holds(kind, true, "not applicable")),
    };
    let all = run.cav.cavities();
    let mut cases = 0;
    for i in 1..=dec.heavy_roots.len() {
        if all.iter().any(|&v| dec.part_of(v) == Some(i)) {
            continue;
        }
        cases += 1;
        let removed = dec.part_vertices(i);
        let region: Vec<usize> = (0..tree.len()).filter(|v| removed.binary_search(v).is_err()).collect();
        let par = tree.parent(dec.part_root(i)).expect("heavy roots have parents");
        let entry = move |_: usize, _: &SdSelector, old: &[usize]| old.binary_search(&par).ok();
        if let Err(e) = simulate_on(sd, inst, run, &region, tree.root(), &entry)? {
            return Ok(Check::holds(kind, false, format!("without part {i}: {e}")));
        }
    }
    let by_search = |r: usize, sub: &SdSelector, old: &[usize]| entry_vertex(sd, r, sub, old);
    let mut confined = Vec::new();
    if let Some(i) = (0..=dec.heavy_roots.len()).find(|&i| all.iter().all(|&v| dec.part_of(v) == Some(i))) {
        confined.push((format!("part {i}"), dec.part_vertices(i).to_vec(), dec.part_root(i)));
    }
    if all.iter().all(|&v| dec.part_of(v) != Some(0)) {
        if let Some(j) = [1, 2].into_iter().find(|&j| all.iter().all(|&v| dec.side_of(v) == Some(j))) {
            confined.push((format!("side {j}"), dec.side_vertices(j).to_vec(), dec.side_root(j)));
        }
    }
    for (label, region, root) in confined {
        cases += 1;
        if let Err(e) = simulate_on(sd, inst, run, &region, root, &by_search)? {
            return Ok(Check::holds(kind, false, format!("{label}: {e}")));
        }
    }
    Ok(Check::holds(kind, true, if cases == 0 { "not applicable" } else { "" }))
}

/// Runs every hybrid check on one SD hybrid instance.
///
/// The compression-based checks (partial cycles, simulation) run on the
/// well-behaved compression of the instance.
pub fn sd_hybrid_suite(sd: &SdSelector, inst: &OnlineInstance, spec: HybridSpec) -> Result<Vec<Check>, HybridError> {
    let run = match run_hybrid(inst, sd, spec) {
        Err(e @ HybridError::CavityStructure { .. }) => {
            return Ok(vec![Check::holds(CheckKind::CavityUniqueness, false, e.to_string())]);
        }
        other => other?,
    };
    let tree = sd.tree();
    let mut checks = vec![Check::holds(CheckKind::CavityUniqueness, true, ""), check_cavity_steps(&run)];
    if !run.cav.valid {
        return Ok(checks);
    }
    checks.push(check_cycle_cost_bound(&run, |u, v| tree.path_distance(u, v)));
    checks.push(check_main_bound(tree, &run));
    checks.push(check_first_cavity_weight(tree, &run));
    checks.push(check_confinement(tree, &run)?);
    checks.push(check_conjugate(inst, sd, &run)?);
    let (wb_check, wb_inst, wb_run) = check_well_behaved(inst, sd, &run)?;
    let wb_ok = wb_check.pass;
    checks.push(wb_check);
    if wb_ok {
        checks.push(check_partial_cycles(&wb_inst, sd, &wb_run)?);
        checks.push(check_simulation(sd, &wb_inst, &wb_run)?);
    }
    Ok(checks)
}
