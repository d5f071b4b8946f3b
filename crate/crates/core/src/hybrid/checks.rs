use super::{Check, CheckKind, HybridRun};
use crate::Rational;

/// Checks the per-step movement rules of the cavities against both traces.
///
/// At each step at most one of the two cavities moves; a moving hybrid
/// cavity means the base run filled the new one while the hybrid filled
/// the old one (and symmetrically for the base cavity); otherwise both runs
/// serve the request identically. The request right after coupling goes to
/// the last base cavity in the base run and to the last hybrid cavity in
/// the hybrid run.
pub fn check_cavity_steps(run: &HybridRun) -> Check {
    let cav = &run.cav;
    let kind = CheckKind::CavitySteps;
    if !cav.valid {
        let same = run.trace_a.assignments() == run.trace_h.assignments();
        return Check::holds(kind, same, if same { "" } else { "invalid hybrid diverged" });
    }
    let a_site = |t: usize| run.trace_a.steps[t - 1].site;
    let h_site = |t: usize| run.trace_h.steps[t - 1].site;
    let fail = |detail: String| Check::holds(kind, false, detail);
    if a_site(cav.t_d) != cav.h_at(cav.t_d) || h_site(cav.t_d) != cav.a_d || cav.a_at(cav.t_d) != cav.a_d {
        return fail(format!("decoupling step {} does not open the expected cavities", cav.t_d));
    }
    for t in cav.t_d + 1..=cav.t_c {
        let h_moved = cav.h_at(t - 1) != cav.h_at(t);
        let a_moved = cav.a_at(t - 1) != cav.a_at(t);
        let ok = match (h_moved, a_moved) {
            (true, true) => false,
            (true, false) => a_site(t) == cav.h_at(t) && h_site(t) == cav.h_at(t - 1),
            (false, true) => a_site(t) == cav.a_at(t - 1) && h_site(t) == cav.a_at(t),
            (false, false) => a_site(t) == h_site(t),
        };
        if !ok {
            return fail(format!("step {t} breaks the cavity movement rules"));
        }
    }
    let t = cav.t_c + 1;
    if a_site(t) != cav.a_at(cav.t_c) || h_site(t) != cav.h_at(cav.t_c) {
        return fail(format!("coupling step {t} does not close the cavities"));
    }
    if run.trace_a.steps[t..].iter().zip(&run.trace_h.steps[t..]).any(|(x, y)| x.site != y.site) {
        return fail("runs differ after coupling".into());
    }
    Check::holds(kind, true, "")
}

/// `cost(A) - cost(H) <= ring length`, both measured with `d`.
pub fn check_cycle_cost_bound(run: &HybridRun, mut d: impl FnMut(usize, usize) -> Rational) -> Check {
    let lhs = run.trace_a.cost_under(&mut d) - run.trace_h.cost_under(&mut d);
    let rhs = run.cav.ring_length(d);
    Check::inequality(CheckKind::CycleCost, lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::super::{run_hybrid, HybridSpec};
    use super::*;
    use crate::instance::{enumerate_sequences, OnlineInstance};
    use crate::metric::WeightedTree;
    use crate::online::{Greedy, SdSelector};

    fn r(p: i64) -> Rational {
        Rational::from_integer(p)
    }

    #[test]
    fn p2_example_passes() {
        let p2 = WeightedTree::from_edges(2, &[(0, 1, r(1))]).unwrap();
        let inst = OnlineInstance::tree_all_sites(p2.clone(), vec![0, 0]).unwrap();
        let run = run_hybrid(&inst, &SdSelector::new(p2.clone()).unwrap(), HybridSpec { t_d: 1, a_d: 1 }).unwrap();
        assert!(check_cavity_steps(&run).pass);
        let c = check_cycle_cost_bound(&run, |u, v| p2.path_distance(u, v));
        assert_eq!(c.bound, Some((r(0), r(2))));
        assert!(c.pass);
    }

    #[test]
    fn hold_for_greedy_on_every_p4_sequence() {
        let t = WeightedTree::from_edges(4, &[(0, 1, r(1)), (1, 2, r(2)), (2, 3, r(1))]).unwrap();
        let base = OnlineInstance::tree_all_sites(t.clone(), vec![0; 4]).unwrap();
        let greedy = Greedy::new(&base.geometry, &base.sites);
        for seq in enumerate_sequences(&[0, 1, 2, 3], 4) {
            let inst = base.with_requests(seq).unwrap();
            for t_d in 1..=4 {
                for a_d in 0..4 {
                    let run = run_hybrid(&inst, &greedy, HybridSpec { t_d, a_d }).unwrap();
                    assert!(check_cavity_steps(&run).pass);
                    assert!(check_cycle_cost_bound(&run, |u, v| t.path_distance(u, v)).pass);
                }
            }
        }
    }
}
