use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{Finding, Summary, SweepReport, SweepRow};
use super::{Family, HarnessError, SweepConfig, SweepOutcome, MAX_WITNESSES};
use crate::hybrid::{sd_hybrid_suite, Check, HybridSpec};
use crate::instance::{
    digest, enumerate_sequences, enumerate_small_trees, generate, sequence_at, sequence_count, CapacityScheme, GeneratorConfig,
    OnlineInstance, Shape, WeightSpec,
};
use crate::online::{run_online, AlgorithmName, FreeSet, Prepared, SdSelector};
use crate::oracle::{opt_cost, CostModel, OracleError, SEARCH_LIMIT};
use crate::{Geometry, InstanceKind, Rational};

/// One template of a bound sweep: every sequence of length `k` over
/// `positions` is evaluated with the template's geometry, sites and
/// capacities.
#[derive(Debug, Clone)]
pub struct Case {
    pub template: OnlineInstance,
    pub positions: Vec<usize>,
    pub alg: AlgorithmName,
    /// Cost model of the denominator: tree max-weight or metric.
    pub den: CostModel,
    pub bound: Rational,
}

impl Case {
    pub fn sequences(&self) -> impl Iterator<Item = OnlineInstance> + '_ {
        enumerate_sequences(&self.positions, self.template.k())
            .map(|seq| self.template.with_requests(seq).expect("template accepts its own positions"))
    }
}

fn int(v: usize) -> Rational {
    Rational::from_integer(v as i64)
}

fn seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}

/// The templates of a bound family. Empty for the hybrid family.
pub fn sweep_cases(config: &SweepConfig) -> Result<Vec<Case>, HarnessError> {
    let mut cases = Vec::new();
    match config.family {
        Family::SdTstrong => {
            for n in 2..=config.max_n.min(config.max_k) {
                for tree in enumerate_small_trees(n, &[0, 1, 2])? {
                    cases.push(Case {
                        template: OnlineInstance::tree_all_sites(tree, vec![0; n])?,
                        positions: (0..n).collect(),
                        alg: AlgorithmName::Sd,
                        den: CostModel::TreeMaxWeight,
                        bound: int(3 * n - 3),
                    });
                }
            }
        }
        Family::BstarOmms => {
            let ks: Vec<usize> = (2..=config.max_k).collect();
            if ks.is_empty() {
                return Err(HarnessError::Guard { what: "max-k below", value: config.max_k, limit: 2 });
            }
            for (i, seed) in seeds(config.seed, config.cases).into_iter().enumerate() {
                let k = ks[i % ks.len()];
                let template = generate(&GeneratorConfig {
                    seed,
                    shape: Shape::RandomMetric,
                    n: k,
                    m: k,
                    k,
                    weights: WeightSpec::Uniform { lo: 0, hi: 3 },
                    capacity: CapacityScheme::Unit,
                    requests_on_sites: true,
                })?;
                let positions = template.sites.clone();
                cases.push(Case { template, positions, alg: AlgorithmName::BStar, den: CostModel::Metric, bound: int(4 * k - 3) });
            }
        }
        Family::PipelineOtr => {
            let ks: Vec<usize> = (3..=config.max_k).collect();
            if ks.is_empty() {
                return Err(HarnessError::Guard { what: "max-k below", value: config.max_k, limit: 3 });
            }
            for (i, seed) in seeds(config.seed, config.cases).into_iter().enumerate() {
                let m = 2 + i % 2;
                let k = ks[(i / 2) % ks.len()];
                let mut template = generate(&GeneratorConfig {
                    seed,
                    shape: Shape::RandomMetric,
                    n: m + 2,
                    m,
                    k,
                    weights: WeightSpec::Uniform { lo: 0, hi: 3 },
                    capacity: CapacityScheme::Random,
                    requests_on_sites: false,
                })?;
                template.kind = InstanceKind::Otr;
                let positions = (0..m + 2).collect();
                cases.push(Case { template, positions, alg: AlgorithmName::BStar, den: CostModel::Metric, bound: int(8 * m - 5) });
            }
        }
        Family::HybridLemmas => {}
    }
    Ok(cases)
}

struct Worst {
    index: usize,
    alg: Rational,
    opt: Rational,
    opt_max: Option<Rational>,
    ratio: Option<Rational>,
}

/// `None` ratios (positive cost over a zero optimum) rank above everything.
fn worse(a: &Option<Rational>, b: &Option<Rational>) -> bool {
    match (a, b) {
        (None, Some(_)) => true,
        (Some(x), Some(y)) => x > y,
        _ => false,
    }
}

fn eval_case(case: &Case) -> Result<(SweepRow, Option<OnlineInstance>), HarnessError> {
    let k = case.template.k();
    let count = sequence_count(case.positions.len(), k)
        .filter(|&c| c <= SEARCH_LIMIT)
        .ok_or_else(|| OracleError::TooLarge { count: format!("{}^{}", case.positions.len(), k), limit: SEARCH_LIMIT })?;
    let alg = Prepared::new(case.alg, &case.template)?;
    let is_tree = matches!(case.template.geometry, Geometry::Tree(_));
    let mut worst: Option<Worst> = None;
    let mut order_ok = true;
    for index in 0..count {
        let inst = case.template.with_requests(sequence_at(&case.positions, k, index))?;
        let a = alg.run(&inst, false)?.total;
        let opt = opt_cost(&inst, CostModel::Metric)?;
        let opt_max = if is_tree { Some(opt_cost(&inst, CostModel::TreeMaxWeight)?) } else { None };
        order_ok &= opt_max.is_none_or(|m| m <= opt);
        let den = if case.den == CostModel::TreeMaxWeight { opt_max.expect("tree family") } else { opt };
        let ratio = if den == Rational::from_integer(0) { (a == den).then_some(den) } else { Some(a / den) };
        if worst.as_ref().is_none_or(|w| worse(&ratio, &w.ratio)) {
            worst = Some(Worst { index, alg: a, opt, opt_max, ratio });
        }
    }
    let w = worst.expect("at least one sequence");
    let inst = case.template.with_requests(sequence_at(&case.positions, k, w.index))?;
    let mut row = SweepRow {
        digest: digest(&inst),
        alg: case.alg.to_string(),
        k,
        m: case.template.m(),
        sequences: count,
        alg_cost: w.alg,
        opt_cost: w.opt,
        opt_max_cost: w.opt_max,
        ratio: w.ratio,
        bound: case.bound,
        pass: false,
    };
    row.pass = row.within_bound() && order_ok;
    let witness = (!row.pass).then_some(inst);
    Ok((row, witness))
}

pub(super) fn run_bound_sweep(config: &SweepConfig) -> Result<SweepOutcome, HarnessError> {
    let cases = sweep_cases(config)?;
    let results: Vec<(SweepRow, Option<OnlineInstance>)> = cases.par_iter().map(eval_case).collect::<Result<_, _>>()?;
    let witnesses = results.iter().filter_map(|r| r.1.clone()).take(MAX_WITNESSES).collect();
    let rows: Vec<SweepRow> = results.into_iter().map(|r| r.0).collect();
    let report = SweepReport {
        config: config.clone(),
        seed: config.seed,
        timestamp: None,
        summary: Summary::from_rows(&rows),
        rows,
        findings: vec![],
    };
    Ok(SweepOutcome { report, witnesses })
}

/// A hybrid of SD: the instance (a tree with a server on every vertex) and
/// the decoupling choice.
#[derive(Debug, Clone)]
pub struct HybridCase {
    pub instance: OnlineInstance,
    pub spec: HybridSpec,
}

/// Every valid decoupling choice for SD on `inst`.
fn valid_specs(sd: &SdSelector, inst: &OnlineInstance) -> Result<Vec<HybridSpec>, HarnessError> {
    let trace = run_online(inst, sd)?;
    let mut free = FreeSet::from_sites(inst.n(), &inst.sites);
    let mut specs = Vec::new();
    for (i, step) in trace.steps.iter().enumerate() {
        specs.extend(free.iter().filter(|&s| s != step.site).map(|a_d| HybridSpec { t_d: i + 1, a_d }));
        free.remove(step.site);
    }
    Ok(specs)
}

/// A random valid SD hybrid on a random power-of-two tree with
/// `2..=max_n` vertices and edge weights in {1, 2, 4}.
pub fn random_valid_spec(seed: u64, max_n: usize) -> Result<HybridCase, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(2..=max_n.max(2));
        let instance = generate(&GeneratorConfig::tree(rng.random(), Shape::RandomTree, n, 0, 2))?;
        let sd = SdSelector::new(instance.geometry.as_tree().expect("tree shape").clone()).map_err(crate::online::OnlineError::from)?;
        let specs = valid_specs(&sd, &instance)?;
        if let Some(&spec) = specs.choose(&mut rng) {
            return Ok(HybridCase { instance, spec });
        }
    }
}

/// The random part of the hybrid family, `config.cases` instances.
pub fn hybrid_cases(config: &SweepConfig) -> Result<Vec<HybridCase>, HarnessError> {
    seeds(config.seed, config.cases).into_iter().map(|s| random_valid_spec(s, 6)).collect()
}

struct HybridTally {
    hybrids: usize,
    findings: Vec<Finding>,
    checks: Vec<Check>,
    witnesses: Vec<OnlineInstance>,
}

fn run_suite(sd: &SdSelector, inst: &OnlineInstance, specs: &[HybridSpec], out: &mut HybridTally) -> Result<(), HarnessError> {
    let mut digest_cache: Option<String> = None;
    for &spec in specs {
        let checks = sd_hybrid_suite(sd, inst, spec)?;
        out.hybrids += 1;
        for c in &checks {
            if c.bound.is_some() || !c.pass {
                let d = digest_cache.get_or_insert_with(|| digest(inst));
                out.findings.push(Finding::new(d, spec, c));
            }
            if !c.pass && out.witnesses.len() < MAX_WITNESSES {
                out.witnesses.push(inst.clone());
            }
        }
        out.checks.extend(checks);
    }
    Ok(())
}

fn tally() -> HybridTally {
    HybridTally { hybrids: 0, findings: vec![], checks: vec![], witnesses: vec![] }
}

pub(super) fn run_hybrid_sweep(config: &SweepConfig) -> Result<SweepOutcome, HarnessError> {
    let mut trees = Vec::new();
    for n in 2..=config.max_n {
        trees.extend(enumerate_small_trees(n, &[0, 1])?);
    }
    let exhaustive: Vec<HybridTally> = trees
        .par_iter()
        .map(|tree| {
            let mut out = tally();
            let sd = SdSelector::new(tree.clone()).map_err(crate::online::OnlineError::from)?;
            let verts: Vec<usize> = (0..tree.len()).collect();
            for seq in enumerate_sequences(&verts, tree.len()) {
                let inst = OnlineInstance::tree_all_sites(tree.clone(), seq)?;
                let specs = valid_specs(&sd, &inst)?;
                run_suite(&sd, &inst, &specs, &mut out)?;
            }
            Ok(out)
        })
        .collect::<Result<_, HarnessError>>()?;
    let random: Vec<HybridTally> = hybrid_cases(config)?
        .par_iter()
        .map(|case| {
            let mut out = tally();
            let tree = case.instance.geometry.as_tree().expect("tree instance").clone();
            let sd = SdSelector::new(tree).map_err(crate::online::OnlineError::from)?;
            run_suite(&sd, &case.instance, &[case.spec], &mut out)?;
            Ok(out)
        })
        .collect::<Result<_, HarnessError>>()?;
    let templates = trees.len() + random.len();
    let parts: Vec<HybridTally> = exhaustive.into_iter().chain(random).collect();
    let mut summary = Summary::from_checks(templates, parts.iter().flat_map(|p| &p.checks));
    summary.sequences = parts.iter().map(|p| p.hybrids).sum();
    let witnesses = parts.iter().flat_map(|p| p.witnesses.iter().cloned()).take(MAX_WITNESSES).collect();
    let findings = parts.into_iter().flat_map(|p| p.findings).collect();
    let report = SweepReport { config: config.clone(), seed: config.seed, timestamp: None, summary, rows: vec![], findings };
    Ok(SweepOutcome { report, witnesses })
}

#[cfg(test)]
mod tests {
    use super::super::run_sweep;
    use super::*;

    #[test]
    fn sd_tstrong_on_two_and_three_vertices() {
        let mut config = SweepConfig::new(Family::SdTstrong);
        config.max_n = 3;
        let out = run_sweep(&config).unwrap();
        // 1 tree shape with 3 weights on n = 2, 3 shapes with 9 weightings on n = 3.
        assert_eq!(out.report.rows.len(), 3 + 27);
        assert!(out.passed());
        assert!(out.report.rows.iter().all(|r| r.pass == r.within_bound()));
    }

    #[test]
    fn pipeline_templates_accept_every_sequence() {
        let mut config = SweepConfig::new(Family::PipelineOtr);
        config.cases = 8;
        config.max_k = 4;
        let cases = sweep_cases(&config).unwrap();
        assert!(cases.iter().any(|c| c.template.has_unit_capacities()));
        let out = run_sweep(&config).unwrap();
        assert!(out.passed());
        assert!(out.report.rows.iter().all(|r| r.sequences == (r.m + 2).pow(r.k as u32)));
    }

    #[test]
    fn random_specs_are_valid_and_deterministic() {
        for seed in 0..20 {
            let a = random_valid_spec(seed, 6).unwrap();
            let b = random_valid_spec(seed, 6).unwrap();
            assert_eq!((a.instance.clone(), a.spec), (b.instance, b.spec));
            let sd = SdSelector::new(a.instance.geometry.as_tree().unwrap().clone()).unwrap();
            assert!(valid_specs(&sd, &a.instance).unwrap().contains(&a.spec));
        }
    }

    #[test]
    fn small_hybrid_sweep_passes() {
        let mut config = SweepConfig::new(Family::HybridLemmas);
        config.max_n = 2;
        config.cases = 50;
        let out = run_sweep(&config).unwrap();
        assert!(out.passed(), "{:?}", out.report.findings.iter().find(|f| !f.pass));
        assert!(out.report.summary.sequences > 50);
    }
}
