use num_traits::Zero;

use super::{MetricError, WeightedTree};
use crate::Rational;

/// A finite metric space with exact pairwise distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpace {
    dist: Vec<Vec<Rational>>,
}

impl MetricSpace {
    /// Builds a metric from a full distance matrix, checking every metric axiom.
    pub fn new(dist: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        let n = dist.len();
        if dist.iter().any(|row| row.len() != n) {
            return Err(MetricError::NotSquare { n });
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(MetricError::NonZeroDiagonal { i });
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(MetricError::Asymmetric { i, j });
                }
                if i != j && dist[i][j] <= Rational::zero() {
                    return Err(MetricError::NonPositive { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return Err(MetricError::Triangle { i, j, k });
                    }
                }
            }
        }
        Ok(Self { dist })
    }

    /// The path metric of a tree on its vertex set.
    pub fn from_tree(tree: &WeightedTree) -> Self {
        let n = tree.len();
        let dist = (0..n)
            .map(|u| (0..n).map(|v| tree.path_distance(u, v)).collect())
            .collect();
        Self { dist }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// # Panics
    /// If either index is out of range.
    pub fn dist(&self, i: usize, j: usize) -> Rational {
        self.dist[i][j]
    }

    pub fn checked_dist(&self, i: usize, j: usize) -> Result<Rational, MetricError> {
        let n = self.len();
        for v in [i, j] {
            if v >= n {
                return Err(MetricError::VertexOutOfRange { vertex: v, n });
            }
        }
        Ok(self.dist[i][j])
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    /// Smallest distance between two distinct points, `None` below two points.
    pub fn min_distance(&self) -> Option<Rational> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist[i][j])
            .min()
    }

    /// The sub-metric on `points`, re-indexed in the given order.
    pub fn restrict(&self, points: &[usize]) -> Self {
        let dist = points
            .iter()
            .map(|&i| points.iter().map(|&j| self.dist[i][j]).collect())
            .collect();
        Self { dist }
    }

    /// Every distance divided by `factor`.
    pub fn scaled_down(&self, factor: Rational) -> Self {
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|d| d / factor).collect())
            .collect();
        Self { dist }
    }
}
