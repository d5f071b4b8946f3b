use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::enumerate::prufer_edges;
use super::{Geometry, InstanceError, InstanceKind, OnlineInstance};
use crate::metric::{MetricSpace, WeightedTree};
use crate::Rational;

/// Topology of the generated space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Uniformly random labeled tree (random Prüfer code), rooted at 0.
    RandomTree,
    /// Path `0 - 1 - ... - (n-1)`.
    Path,
    /// Star centred at vertex 0.
    Star,
    /// Metric closure of a complete graph with random integer weights.
    RandomMetric,
}

/// How edge weights are drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightSpec {
    /// Tree edges get `2^e` with `e` uniform in `[lo, hi]`; metric edges get
    /// an integer uniform in `[2^lo, 2^hi]`.
    Uniform { lo: u32, hi: u32 },
    /// Explicit exponents, one per edge in generation order.
    Fixed(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityScheme {
    /// Every site has capacity 1 (requires `k == m`).
    Unit,
    /// A uniformly random composition of `k` into `m` positive parts.
    Random,
}

/// Parameters of a seeded instance. The generator is ChaCha8 seeded with
/// `seed`, so equal configs always give equal instances on every platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub shape: Shape,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub weights: WeightSpec,
    pub capacity: CapacityScheme,
    /// Draw requests from the sites only instead of from all points.
    pub requests_on_sites: bool,
}

impl GeneratorConfig {
    /// An OMT_S² style config: servers on every vertex, `k = n`.
    pub fn tree(seed: u64, shape: Shape, n: usize, lo: u32, hi: u32) -> Self {
        Self {
            seed,
            shape,
            n,
            m: n,
            k: n,
            weights: WeightSpec::Uniform { lo, hi },
            capacity: CapacityScheme::Unit,
            requests_on_sites: true,
        }
    }
}

const MAX_EXPONENT: u32 = 40;

fn infeasible(msg: impl Into<String>) -> InstanceError {
    InstanceError::Infeasible(msg.into())
}

struct WeightDraw<'a> {
    spec: &'a WeightSpec,
    next: usize,
}

impl WeightDraw<'_> {
    fn exponent(&mut self, rng: &mut ChaCha8Rng) -> Result<u32, InstanceError> {
        match self.spec {
            WeightSpec::Uniform { lo, hi } => Ok(rng.random_range(*lo..=*hi)),
            WeightSpec::Fixed(es) => {
                let e = es.get(self.next).copied().ok_or_else(|| infeasible("too few fixed exponents"))?;
                self.next += 1;
                Ok(e)
            }
        }
    }

    fn finish(&self) -> Result<(), InstanceError> {
        match self.spec {
            WeightSpec::Fixed(es) if es.len() != self.next => Err(infeasible("too many fixed exponents")),
            _ => Ok(()),
        }
    }
}

/// Generates a validated instance from `config`.
pub fn generate(config: &GeneratorConfig) -> Result<OnlineInstance, InstanceError> {
    let GeneratorConfig { seed, shape, n, m, k, .. } = *config;
    if n == 0 {
        return Err(infeasible("n must be at least 1"));
    }
    if m == 0 || m > n {
        return Err(infeasible(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if k < m || (config.capacity == CapacityScheme::Unit && k != m) {
        return Err(infeasible(format!("k = {k} incompatible with m = {m} and the capacity scheme")));
    }
    match &config.weights {
        WeightSpec::Uniform { lo, hi } if lo > hi || *hi > MAX_EXPONENT => {
            return Err(infeasible(format!("bad exponent range [{lo}, {hi}]")));
        }
        WeightSpec::Fixed(es) if es.iter().any(|&e| e > MAX_EXPONENT) => {
            return Err(infeasible("fixed exponent too large"));
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = WeightDraw { spec: &config.weights, next: 0 };
    let geometry = match shape {
        Shape::RandomTree | Shape::Path | Shape::Star => {
            let pairs: Vec<(usize, usize)> = match shape {
                Shape::Path => (1..n).map(|v| (v - 1, v)).collect(),
                Shape::Star => (1..n).map(|v| (0, v)).collect(),
                _ => {
                    let code: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.random_range(0..n)).collect();
                    prufer_edges(&code, n)
                }
            };
            let mut edges = Vec::with_capacity(pairs.len());
            for (u, v) in pairs {
                edges.push((u, v, Rational::from_integer(1i64 << draw.exponent(&mut rng)?)));
            }
            Geometry::Tree(WeightedTree::from_edges(n, &edges)?)
        }
        Shape::RandomMetric => {
            let mut d = vec![vec![Rational::from_integer(0); n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let w = match config.weights {
                        WeightSpec::Uniform { lo, hi } => rng.random_range((1i64 << lo)..=(1i64 << hi)),
                        WeightSpec::Fixed(_) => 1i64 << draw.exponent(&mut rng)?,
                    };
                    d[i][j] = Rational::from_integer(w);
                    d[j][i] = d[i][j];
                }
            }
            for via in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let through = d[i][via] + d[via][j];
                        if through < d[i][j] {
                            d[i][j] = through;
                        }
                    }
                }
            }
            Geometry::Metric(MetricSpace::new(d)?)
        }
    };
    draw.finish()?;

    let sites: Vec<usize> = if m == n {
        (0..n).collect()
    } else {
        let mut s = index::sample(&mut rng, n, m).into_vec();
        s.sort_unstable();
        s
    };
    let capacities = match config.capacity {
        CapacityScheme::Unit => vec![1; m],
        CapacityScheme::Random => {
            let mut cuts = index::sample(&mut rng, k - 1, m - 1).into_vec();
            cuts.sort_unstable();
            let mut prev = 0;
            let mut caps = Vec::with_capacity(m);
            for c in cuts.into_iter().map(|c| c + 1).chain(std::iter::once(k)) {
                caps.push((c - prev) as u32);
                prev = c;
            }
            caps
        }
    };
    let requests: Vec<usize> = (0..k)
        .map(|_| if config.requests_on_sites { sites[rng.random_range(0..m)] } else { rng.random_range(0..n) })
        .collect();

    let unit = capacities.iter().all(|&c| c == 1);
    let on_sites = requests.iter().all(|r| sites.binary_search(r).is_ok());
    let kind = match &geometry {
        Geometry::Tree(t) if unit && m == n && t.is_power_of_two() => InstanceKind::OmtS2,
        _ if unit && on_sites => InstanceKind::OmmS,
        _ if unit => InstanceKind::Omm,
        _ => InstanceKind::Otr,
    };
    Ok(OnlineInstance::new(geometry, sites, capacities, requests, kind)?.with_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_path_is_p3() {
        let cfg = GeneratorConfig {
            weights: WeightSpec::Fixed(vec![0, 1]),
            ..GeneratorConfig::tree(1, Shape::Path, 3, 0, 0)
        };
        let inst = generate(&cfg).unwrap();
        let p3 = WeightedTree::from_edges(
            3,
            &[(0, 1, Rational::from_integer(1)), (1, 2, Rational::from_integer(2))],
        )
        .unwrap();
        assert_eq!(inst.geometry, Geometry::Tree(p3));
        assert_eq!(inst.kind, InstanceKind::OmtS2);
    }

    #[test]
    fn same_seed_same_instance() {
        for shape in [Shape::RandomTree, Shape::Path, Shape::Star, Shape::RandomMetric] {
            let cfg = GeneratorConfig {
                seed: 42,
                shape,
                n: 6,
                m: 3,
                k: 7,
                weights: WeightSpec::Uniform { lo: 0, hi: 3 },
                capacity: CapacityScheme::Random,
                requests_on_sites: false,
            };
            let a = generate(&cfg).unwrap();
            assert_eq!(a, generate(&cfg).unwrap());
            assert_eq!(a.capacities.iter().sum::<u32>(), 7);
            assert_eq!(a.kind, InstanceKind::Otr);
            let other = generate(&GeneratorConfig { seed: 43, ..cfg }).unwrap();
            assert_ne!(a.requests.len(), 0);
            assert!(other.validate().is_ok());
        }
    }

    #[test]
    fn random_metric_is_a_metric() {
        for seed in 0..50 {
            let cfg = GeneratorConfig {
                seed,
                shape: Shape::RandomMetric,
                n: 4,
                m: 4,
                k: 4,
                weights: WeightSpec::Uniform { lo: 0, hi: 4 },
                capacity: CapacityScheme::Unit,
                requests_on_sites: true,
            };
            let inst = generate(&cfg).unwrap();
            assert!(MetricSpace::new(inst.geometry.to_metric().matrix().to_vec()).is_ok());
            assert_eq!(inst.kind, InstanceKind::OmmS);
        }
    }

    #[test]
    fn rejects_infeasible_configs() {
        let base = GeneratorConfig::tree(0, Shape::Path, 3, 0, 1);
        for bad in [
            GeneratorConfig { m: 4, ..base.clone() },
            GeneratorConfig { k: 5, ..base.clone() },
            GeneratorConfig { n: 0, ..base.clone() },
            GeneratorConfig { weights: WeightSpec::Uniform { lo: 2, hi: 1 }, ..base.clone() },
            GeneratorConfig { weights: WeightSpec::Fixed(vec![0]), ..base.clone() },
            GeneratorConfig { weights: WeightSpec::Fixed(vec![0, 0, 0]), ..base.clone() },
        ] {
            assert!(matches!(generate(&bad), Err(InstanceError::Infeasible(_))), "{bad:?}");
        }
    }
}
