//! Subtree-Decomposition (SD) for the online transportation problem.
//!
//! The crate is organized bottom-up:
//!
//! * [`metric`]: finite metric spaces, rooted weighted trees with path and
//!   max-weight distances, minimum spanning trees, power-of-two rounding and
//!   the SD tree decomposition.
//! * [`instance`]: online instances, normalization, seeded generators,
//!   exhaustive enumerators and the JSON instance format.
//! * [`online`]: the MPFS framework, the SD algorithm, greedy and Permutation
//!   baselines, and the nearest-site / MST lifting pipeline (`bstar`).
//! * [`oracle`]: exact offline optimum via min-cost flow and exhaustive
//!   worst-case ratio search.
//! * [`hybrid`]: hybrid algorithms, cavity traces and checkers for the
//!   structural lemmas behind the competitive bounds.
//! * [`harness`]: sweeps, reports and timing used by the `sdlab` CLI.
//!
//! All distances are exact rationals ([`Rational`]).

pub mod harness;
pub mod hybrid;
pub mod instance;
pub mod metric;
pub mod online;
pub mod oracle;
pub mod rational;

pub use instance::{Geometry, InstanceKind, OnlineInstance};
pub use metric::{Decomposition, MetricSpace, WeightedTree};
pub use online::{AssignmentTrace, FreeSet, Mpfs};
pub use oracle::CostModel;
pub use rational::Rational;
