//! Exact finite metrics, rooted weighted trees and the SD decomposition.

mod decompose;
mod mst;
mod space;
mod tree;

pub use decompose::{decompose, decompose_region, Decomposed, Decomposition};
pub use mst::{mst_of_metric, round_to_power_of_two};
pub use space::MetricSpace;
pub use tree::WeightedTree;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("distance matrix is not {n}x{n}")]
    NotSquare { n: usize },
    #[error("d({i},{i}) must be zero")]
    NonZeroDiagonal { i: usize },
    #[error("d({i},{j}) != d({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("d({i},{j}) must be positive for distinct points")]
    NonPositive { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("a tree on {n} vertices needs {} edges, got {got}", n.saturating_sub(1))]
    EdgeCount { n: usize, got: usize },
    #[error("edge list does not form a spanning tree (cycle or disconnected)")]
    NotATree,
    #[error("edge ({u},{v}) has non-positive weight")]
    NonPositiveWeight { u: usize, v: usize },
    #[error("edge ({u},{v}) weight is not a power of two")]
    NotPowerOfTwo { u: usize, v: usize },
    #[error("edge ({u},{v}) weight is below 1; normalize the metric first")]
    WeightBelowOne { u: usize, v: usize },
    #[error("region is empty or does not contain its root")]
    BadRegion,
}
