use super::InstanceError;
use crate::metric::WeightedTree;
use crate::Rational;

/// Largest tree size accepted by [`enumerate_small_trees`].
pub const MAX_ENUMERATED_TREE: usize = 6;

/// All `|positions|^k` sequences in lexicographic order of position index.
#[derive(Debug, Clone)]
pub struct Sequences {
    positions: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Sequences {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.digits.iter().map(|&d| self.positions[d]).collect();
        // Odometer increment from the last digit.
        let b = self.positions.len();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < b {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

pub fn enumerate_sequences(positions: &[usize], k: usize) -> Sequences {
    Sequences {
        positions: positions.to_vec(),
        digits: vec![0; k],
        done: positions.is_empty() && k > 0,
    }
}

/// Number of sequences, `None` on overflow.
pub fn sequence_count(positions: usize, k: usize) -> Option<usize> {
    positions.checked_pow(u32::try_from(k).ok()?)
}

/// The `index`-th sequence of [`enumerate_sequences`].
pub fn sequence_at(positions: &[usize], k: usize, mut index: usize) -> Vec<usize> {
    let b = positions.len();
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = positions[index % b];
        index /= b;
    }
    out
}

/// Decodes a Prüfer code over `n` labels into `n - 1` edges.
pub(crate) fn prufer_edges(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(c), leaf.max(c)));
        degree[leaf] = 0;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges.sort_unstable();
    edges
}

/// Every labeled tree on `n` vertices with every assignment of weights
/// `2^e`, `e` from `exponents`, rooted at 0.
///
/// Trees follow Prüfer code order; weightings vary fastest, with the edge
/// list sorted by endpoints.
pub fn enumerate_small_trees(
    n: usize,
    exponents: &[u32],
) -> Result<impl Iterator<Item = WeightedTree>, InstanceError> {
    if n > MAX_ENUMERATED_TREE {
        return Err(InstanceError::TooLarge { what: "n", value: n, limit: MAX_ENUMERATED_TREE });
    }
    if n == 0 {
        return Err(InstanceError::Infeasible("a tree needs at least one vertex".into()));
    }
    let weights: Vec<Rational> = exponents.iter().map(|&e| Rational::from_integer(1i64 << e)).collect();
    let codes: Vec<Vec<usize>> = enumerate_sequences(&(0..n).collect::<Vec<_>>(), n.saturating_sub(2)).collect();
    let positions: Vec<usize> = (0..weights.len()).collect();
    Ok(codes.into_iter().flat_map(move |code| {
        let pairs = prufer_edges(&code, n);
        let weights = weights.clone();
        enumerate_sequences(&positions, pairs.len()).map(move |choice| {
            let edges: Vec<_> = pairs.iter().zip(&choice).map(|(&(u, v), &c)| (u, v, weights[c])).collect();
            WeightedTree::from_edges(n, &edges).expect("Prüfer codes decode to trees")
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sequence_examples() {
        let all: Vec<_> = enumerate_sequences(&[0, 1], 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(enumerate_sequences(&[0, 1], 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        let three: Vec<_> = enumerate_sequences(&[0, 1, 2], 3).collect();
        assert_eq!(three.len(), 27);
        assert_eq!(three[0], vec![0, 0, 0]);
        assert_eq!(three[26], vec![2, 2, 2]);
        assert_eq!(enumerate_sequences(&[], 2).count(), 0);
    }

    #[test]
    fn sequence_at_matches_iteration() {
        let pos = [3, 5, 9];
        for (i, s) in enumerate_sequences(&pos, 4).enumerate() {
            assert_eq!(sequence_at(&pos, 4, i), s);
        }
        assert_eq!(sequence_count(3, 4), Some(81));
        assert_eq!(sequence_count(10, 40), None);
    }

    #[test]
    fn tree_counts() {
        assert_eq!(enumerate_small_trees(2, &[0]).unwrap().count(), 1);
        assert_eq!(enumerate_small_trees(3, &[0]).unwrap().count(), 3);
        assert_eq!(enumerate_small_trees(4, &[0, 1]).unwrap().count(), 128);
        assert_eq!(enumerate_small_trees(1, &[0]).unwrap().count(), 1);
        assert!(enumerate_small_trees(7, &[0]).is_err());
    }

    #[test]
    fn trees_are_distinct_and_cayley_many() {
        for n in 2..=6usize {
            let shapes: HashSet<Vec<(usize, usize)>> = enumerate_small_trees(n, &[0])
                .unwrap()
                .map(|t| {
                    let mut e: Vec<_> = t.edges().iter().map(|&(c, p, _)| (c.min(p), c.max(p))).collect();
                    e.sort_unstable();
                    e
                })
                .collect();
            assert_eq!(shapes.len(), n.pow(n as u32 - 2));
        }
    }
}
