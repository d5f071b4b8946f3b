//! Online instances, their on-disk format, seeded generators and exhaustive
//! enumerators.

mod enumerate;
mod format;
mod generate;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use enumerate::{enumerate_sequences, enumerate_small_trees, sequence_at, sequence_count, Sequences};
pub use format::{digest, from_json, to_json};
pub use generate::{generate, CapacityScheme, GeneratorConfig, Shape, WeightSpec};

use crate::metric::{MetricError, MetricSpace, WeightedTree};
use crate::rational::ParseRationalError;
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{sites} sites but {capacities} capacities")]
    CapacityCount { sites: usize, capacities: usize },
    #[error("site {0} has zero capacity")]
    ZeroCapacity(usize),
    #[error("capacities sum to {total} but there are {k} requests")]
    CapacitySum { total: u64, k: usize },
    #[error("point {point} out of range for {n} points")]
    OutOfRange { point: usize, n: usize },
    #[error("site {0} listed twice")]
    DuplicateSite(usize),
    #[error("instance violates the {kind} restrictions: {reason}")]
    Kind { kind: InstanceKind, reason: &'static str },
    #[error("file declares n = {declared} but the geometry has {actual} points")]
    PointCount { declared: usize, actual: usize },
    #[error("exactly one of `edges` and `dist` must be present")]
    Geometry,
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("{what} = {value} exceeds the enumeration guard {limit}")]
    TooLarge { what: &'static str, value: usize, limit: usize },
}

/// Problem class of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceKind {
    #[serde(rename = "OTR")]
    Otr,
    #[serde(rename = "OMM")]
    Omm,
    #[serde(rename = "OMM_S")]
    OmmS,
    #[serde(rename = "OMT_S2")]
    OmtS2,
}

impl std::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InstanceKind::Otr => "OTR",
            InstanceKind::Omm => "OMM",
            InstanceKind::OmmS => "OMM_S",
            InstanceKind::OmtS2 => "OMT_S2",
        })
    }
}

/// The underlying space: an explicit metric or a weighted tree with its
/// path distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Geometry {
    Metric(MetricSpace),
    Tree(WeightedTree),
}

impl Geometry {
    pub fn len(&self) -> usize {
        match self {
            Geometry::Metric(m) => m.len(),
            Geometry::Tree(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Metric distance, or path distance on a tree.
    pub fn dist(&self, u: usize, v: usize) -> Rational {
        match self {
            Geometry::Metric(m) => m.dist(u, v),
            Geometry::Tree(t) => t.path_distance(u, v),
        }
    }

    pub fn as_tree(&self) -> Option<&WeightedTree> {
        match self {
            Geometry::Tree(t) => Some(t),
            Geometry::Metric(_) => None,
        }
    }

    /// The explicit distance matrix (the path metric for trees).
    pub fn to_metric(&self) -> MetricSpace {
        match self {
            Geometry::Metric(m) => m.clone(),
            Geometry::Tree(t) => MetricSpace::from_tree(t),
        }
    }
}

/// An online transportation instance `(X, d, S, c, σ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnlineInstance {
    pub geometry: Geometry,
    pub sites: Vec<usize>,
    pub capacities: Vec<u32>,
    pub requests: Vec<usize>,
    pub kind: InstanceKind,
    pub seed: Option<u64>,
}

impl OnlineInstance {
    /// Builds and validates an instance.
    pub fn new(
        geometry: Geometry,
        sites: Vec<usize>,
        capacities: Vec<u32>,
        requests: Vec<usize>,
        kind: InstanceKind,
    ) -> Result<Self, InstanceError> {
        let inst = Self { geometry, sites, capacities, requests, kind, seed: None };
        inst.validate()?;
        Ok(inst)
    }

    /// An OMT_S² instance: one unit-capacity server on every tree vertex.
    pub fn tree_all_sites(tree: WeightedTree, requests: Vec<usize>) -> Result<Self, InstanceError> {
        let n = tree.len();
        Self::new(Geometry::Tree(tree), (0..n).collect(), vec![1; n], requests, InstanceKind::OmtS2)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Same geometry, sites and capacities with another request sequence.
    pub fn with_requests(&self, requests: Vec<usize>) -> Result<Self, InstanceError> {
        let inst = Self { requests, ..self.clone() };
        inst.validate()?;
        Ok(inst)
    }

    pub fn k(&self) -> usize {
        self.requests.len()
    }

    pub fn m(&self) -> usize {
        self.sites.len()
    }

    pub fn n(&self) -> usize {
        self.geometry.len()
    }

    pub fn has_unit_capacities(&self) -> bool {
        self.capacities.iter().all(|&c| c == 1)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.n();
        if self.sites.len() != self.capacities.len() {
            return Err(InstanceError::CapacityCount {
                sites: self.sites.len(),
                capacities: self.capacities.len(),
            });
        }
        let mut seen = HashSet::new();
        for &s in &self.sites {
            if s >= n {
                return Err(InstanceError::OutOfRange { point: s, n });
            }
            if !seen.insert(s) {
                return Err(InstanceError::DuplicateSite(s));
            }
        }
        if let Some(i) = self.capacities.iter().position(|&c| c == 0) {
            return Err(InstanceError::ZeroCapacity(self.sites[i]));
        }
        if let Some(&r) = self.requests.iter().find(|&&r| r >= n) {
            return Err(InstanceError::OutOfRange { point: r, n });
        }
        let total: u64 = self.capacities.iter().map(|&c| u64::from(c)).sum();
        if total != self.k() as u64 {
            return Err(InstanceError::CapacitySum { total, k: self.k() });
        }
        let kind = self.kind;
        let fail = |reason| Err(InstanceError::Kind { kind, reason });
        match kind {
            InstanceKind::Otr => {}
            InstanceKind::Omm | InstanceKind::OmmS | InstanceKind::OmtS2 => {
                if !self.has_unit_capacities() {
                    return fail("all capacities must be 1");
                }
            }
        }
        if matches!(kind, InstanceKind::OmmS | InstanceKind::OmtS2)
            && self.requests.iter().any(|r| !seen.contains(r))
        {
            return fail("every request must lie on a server site");
        }
        if kind == InstanceKind::OmtS2 {
            match &self.geometry {
                Geometry::Tree(t) if t.is_power_of_two() => {}
                _ => return fail("geometry must be a power-of-two weighted tree"),
            }
            if seen.len() != n {
                return fail("every vertex must be a server site");
            }
        }
        Ok(())
    }

    /// Index into `sites` for every point that hosts a site.
    pub fn site_index(&self) -> Vec<Option<usize>> {
        let mut idx = vec![None; self.n()];
        for (i, &s) in self.sites.iter().enumerate() {
            idx[s] = Some(i);
        }
        idx
    }
}

/// Rescales a metric so its minimum distance is exactly 1.
///
/// Returns the rescaled metric and the factor it was divided by. Spaces with
/// fewer than two points are returned unchanged with factor 1.
pub fn normalize(space: &MetricSpace) -> (MetricSpace, Rational) {
    match space.min_distance() {
        Some(scale) => (space.scaled_down(scale), scale),
        None => (space.clone(), Rational::from_integer(1)),
    }
}
