use super::{ring, run_hybrid, Check, CheckKind, HybridError, HybridRun, HybridSpec};
use crate::instance::OnlineInstance;
use crate::online::Mpfs;

/// The conjugate hybrid: request `t_d` is moved onto `a_d` and the hybrid
/// deviates to the first hybrid cavity instead.
pub fn conjugate_of(inst: &OnlineInstance, run: &HybridRun) -> Result<(OnlineInstance, HybridSpec), HybridError> {
    let cav = &run.cav;
    if !cav.valid {
        return Err(HybridError::Invalid);
    }
    let mut requests = inst.requests.clone();
    requests[cav.t_d - 1] = cav.a_d;
    let inst = inst.with_requests(requests).map_err(|_| HybridError::Server(cav.a_d))?;
    Ok((inst, HybridSpec { t_d: cav.t_d, a_d: cav.h[0] }))
}

/// The conjugate keeps the coupling time, the cavity set and the cycle
/// length and swaps the two cavity sequences; conjugating twice restores
/// them.
pub fn check_conjugate(inst: &OnlineInstance, alg: &(impl Mpfs + ?Sized), run: &HybridRun) -> Result<Check, HybridError> {
    let (inst2, spec2) = conjugate_of(inst, run)?;
    let other = run_hybrid(&inst2, alg, spec2)?;
    let cav = &run.cav;
    let c2 = &other.cav;
    let d = |u, v| inst.geometry.dist(u, v);
    let mut pass = c2.valid && c2.t_c == cav.t_c && c2.h == cav.a && c2.a == cav.h;
    pass &= c2.cavities() == cav.cavities() && c2.ring_length(d) == cav.ring_length(d);
    if pass {
        let (inst3, spec3) = conjugate_of(&inst2, &other)?;
        let back = run_hybrid(&inst3, alg, spec3)?.cav;
        pass = back.valid && back.t_c == cav.t_c && back.h == cav.h && back.a == cav.a;
    }
    Ok(Check::holds(CheckKind::Conjugate, pass, if pass { String::new() } else { format!("conjugate cavities {:?}/{:?}", c2.h, c2.a) }))
}

/// A compressed instance with the same cavity movement: one zero-cost
/// request on every non-cavity server, then only the requests at which a
/// cavity moves.
///
/// Returns the instance, its hybrid spec and the original times
/// `t(0) < .. < t(n)` that were kept.
pub fn well_behaved_of(
    inst: &OnlineInstance,
    run: &HybridRun,
) -> Result<(OnlineInstance, HybridSpec, Vec<usize>), HybridError> {
    let cav = &run.cav;
    if !cav.valid {
        return Err(HybridError::Invalid);
    }
    let mut times = vec![cav.t_d];
    times.extend((cav.t_d + 1..=cav.t_c).filter(|&t| cav.h_at(t - 1) != cav.h_at(t) || cav.a_at(t - 1) != cav.a_at(t)));
    times.push(cav.t_c + 1);
    let cavities = cav.cavities();
    let mut requests: Vec<usize> = inst.sites.iter().copied().filter(|s| cavities.binary_search(s).is_err()).collect();
    let t_d = requests.len() + 1;
    requests.extend(times.iter().map(|&t| inst.requests[t - 1]));
    let inst = inst.with_requests(requests).map_err(|_| HybridError::Invalid)?;
    Ok((inst, HybridSpec { t_d, a_d: cav.a_d }, times))
}

/// The compressed instance is well-behaved: the free sets equal the
/// cavities right before decoupling, a cavity moves at every step, the
/// cavities at the kept times carry over, and coupling happens at the last
/// request.
pub fn check_well_behaved(
    inst: &OnlineInstance,
    alg: &(impl Mpfs + ?Sized),
    run: &HybridRun,
) -> Result<(Check, OnlineInstance, HybridRun), HybridError> {
    let (inst2, spec2, times) = well_behaved_of(inst, run)?;
    let wb = run_hybrid(&inst2, alg, spec2)?;
    let (cav, c2) = (&run.cav, &wb.cav);
    let n = times.len() - 1;
    let expect_h: Vec<usize> = times[..n].iter().map(|&t| cav.h_at(t)).collect();
    let expect_a: Vec<usize> = times[..n].iter().map(|&t| cav.a_at(t)).collect();
    let before = if spec2.t_d >= 2 { c2.free_a[spec2.t_d - 2].to_vec() } else { inst2.sites.clone() };
    let mut problems = Vec::new();
    if !c2.valid || c2.t_c != inst2.k() - 1 {
        problems.push(format!("coupling at {} instead of {}", c2.t_c, inst2.k() - 1));
    }
    if c2.h != expect_h || c2.a != expect_a {
        problems.push(format!("cavities {:?}/{:?}, expected {expect_h:?}/{expect_a:?}", c2.h, c2.a));
    }
    if before != cav.cavities() {
        problems.push(format!("free set {before:?} before decoupling"));
    }
    if wb.trace_a.steps[..spec2.t_d - 1].iter().any(|s| s.request != s.site) {
        problems.push("prefix request not served in place".into());
    }
    let d = |u, v| inst.geometry.dist(u, v);
    if c2.cavities() != cav.cavities() || c2.ring_length(d) != cav.ring_length(d) {
        problems.push("cavity set or cycle length changed".into());
    }
    let check = Check::holds(CheckKind::WellBehaved, problems.is_empty(), problems.join("; "));
    Ok((check, inst2, wb))
}

/// For a well-behaved hybrid and `t_d <= t1 < t2 <= t_c`, the instance
/// whose cavities are exactly the hybrid cavities `h_t1, .., h_t2`.
///
/// Returns `None` when the hybrid cavity does not move in `(t1, t2]`.
/// Otherwise returns the instance, its spec and the expected hybrid cavity
/// sequence.
pub fn partial_cycle_of(
    inst: &OnlineInstance,
    run: &HybridRun,
    t1: usize,
    t2: usize,
) -> Result<Option<(OnlineInstance, HybridSpec, Vec<usize>)>, HybridError> {
    let cav = &run.cav;
    if !cav.valid || t1 < cav.t_d || t1 >= t2 || t2 > cav.t_c {
        return Err(HybridError::Invalid);
    }
    let moved = |t: usize| t > cav.t_d && cav.h_at(t - 1) != cav.h_at(t);
    let changes: Vec<usize> = (t1 + 1..=t2).filter(|&t| moved(t)).collect();
    if changes.is_empty() {
        return Ok(None);
    }
    let start = (cav.t_d..=t1).rev().find(|&t| t == cav.t_d || moved(t)).expect("t_d bounds the search");
    let mut times = vec![start];
    times.extend(changes);
    let hs: Vec<usize> = times.iter().map(|&t| cav.h_at(t)).collect();
    let mut requests: Vec<usize> = inst.sites.iter().copied().filter(|s| !hs.contains(s)).collect();
    let t_d = requests.len() + 1;
    requests.extend(times.iter().map(|&t| inst.requests[t - 1]));
    let inst = inst.with_requests(requests).map_err(|_| HybridError::Invalid)?;
    let n = hs.len() - 1;
    Ok(Some((inst, HybridSpec { t_d, a_d: hs[n] }, hs[..n].to_vec())))
}

/// Runs [`partial_cycle_of`] for every admissible `(t1, t2)` of a
/// well-behaved hybrid and checks the cavity set and cycle length of each.
pub fn check_partial_cycles(inst: &OnlineInstance, alg: &(impl Mpfs + ?Sized), run: &HybridRun) -> Result<Check, HybridError> {
    let cav = &run.cav;
    let d = |u, v| inst.geometry.dist(u, v);
    for t1 in cav.t_d..cav.t_c {
        for t2 in t1 + 1..=cav.t_c {
            let Some((inst2, spec2, expect_h)) = partial_cycle_of(inst, run, t1, t2)? else { continue };
            let c2 = run_hybrid(&inst2, alg, spec2)?.cav;
            let mut hs = expect_h.clone();
            hs.push(spec2.a_d);
            let mut set = hs.clone();
            set.sort_unstable();
            let ok = c2.valid
                && c2.h == expect_h
                && c2.a.iter().all(|&a| a == spec2.a_d)
                && c2.cavities() == set
                && c2.ring_length(d) == ring(&hs, d);
            if !ok {
                let detail = format!("({t1}, {t2}): cavities {:?}/{:?}, expected {expect_h:?}", c2.h, c2.a);
                return Ok(Check::holds(CheckKind::PartialCycle, false, detail));
            }
        }
    }
    Ok(Check::holds(CheckKind::PartialCycle, true, ""))
}
