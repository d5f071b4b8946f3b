use num_traits::Zero;

use crate::Rational;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: Rational,
}

/// Residual graph with paired edges: edge `e ^ 1` is the reverse of `e`.
#[derive(Debug, Clone, Default)]
struct Graph {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], edges: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: i64, cost: Rational) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap, cost });
        self.adj[u].push(id);
        self.edges.push(Edge { to: u, cap: 0, cost: -cost });
        self.adj[v].push(id + 1);
        id
    }

    /// Shortest distances from `src` over edges with spare capacity, with
    /// the edge used to reach each node.
    fn bellman_ford(&self, src: usize) -> (Vec<Option<Rational>>, Vec<Option<usize>>) {
        let n = self.adj.len();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut pred = vec![None; n];
        dist[src] = Some(Rational::zero());
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u] else { continue };
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap <= 0 {
                        continue;
                    }
                    let nd = du + edge.cost;
                    if dist[edge.to].is_none_or(|d| nd < d) {
                        dist[edge.to] = Some(nd);
                        pred[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (dist, pred)
    }

    /// True if the residual graph has a cycle of negative total cost.
    fn has_negative_cycle(&self) -> bool {
        let n = self.adj.len();
        let mut pot = vec![Rational::zero(); n];
        for round in 0..=n {
            let mut changed = false;
            for u in 0..n {
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && pot[u] + edge.cost < pot[edge.to] {
                        pot[edge.to] = pot[u] + edge.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                return false;
            }
            if round == n {
                return true;
            }
        }
        false
    }
}

/// Minimum-cost assignment of rows to columns where column `j` can take at
/// most `capacities[j]` rows. Solved by successive shortest paths on the
/// bipartite flow network.
///
/// Returns the optimal cost and the column of each row, or `None` when the
/// capacities cannot absorb every row.
pub fn min_cost_assignment(costs: &[Vec<Rational>], capacities: &[u32]) -> Option<(Rational, Vec<usize>)> {
    let k = costs.len();
    let m = capacities.len();
    if capacities.iter().map(|&c| c as usize).sum::<usize>() < k {
        return None;
    }
    let (src, sink) = (k + m, k + m + 1);
    let mut g = Graph::new(k + m + 2);
    let mut row_edges = Vec::with_capacity(k);
    for (i, row) in costs.iter().enumerate() {
        g.add_edge(src, i, 1, Rational::zero());
        row_edges.push((0..m).map(|j| g.add_edge(i, k + j, 1, row[j])).collect::<Vec<_>>());
    }
    for (j, &c) in capacities.iter().enumerate() {
        g.add_edge(k + j, sink, i64::from(c), Rational::zero());
    }
    let mut total = Rational::zero();
    for _ in 0..k {
        let (dist, pred) = g.bellman_ford(src);
        let d = dist[sink]?;
        let mut v = sink;
        while v != src {
            let e = pred[v].expect("path to source");
            g.edges[e].cap -= 1;
            g.edges[e ^ 1].cap += 1;
            v = g.edges[e ^ 1].to;
        }
        total += d;
    }
    let assignment = row_edges
        .iter()
        .map(|edges| edges.iter().position(|&e| g.edges[e].cap == 0).expect("every row is matched"))
        .collect();
    Some((total, assignment))
}

/// Checks that `assignment` is feasible and optimal: its residual network
/// has no negative-cost cycle.
pub fn certify_assignment(costs: &[Vec<Rational>], capacities: &[u32], assignment: &[usize]) -> bool {
    let k = costs.len();
    let m = capacities.len();
    if assignment.len() != k || assignment.iter().any(|&j| j >= m) {
        return false;
    }
    let mut used = vec![0u32; m];
    for &j in assignment {
        used[j] += 1;
    }
    if used.iter().zip(capacities).any(|(u, c)| u > c) {
        return false;
    }
    // Residual network of the flow; the source is dropped because all of
    // its edges are saturated and it has no residual out-edges.
    let sink = k + m;
    let mut g = Graph::new(k + m + 1);
    for (i, row) in costs.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if assignment[i] == j {
                g.add_edge(k + j, i, 1, -c);
            } else {
                g.add_edge(i, k + j, 1, c);
            }
        }
    }
    for j in 0..m {
        if used[j] < capacities[j] {
            g.add_edge(k + j, sink, 1, Rational::zero());
        }
        if used[j] > 0 {
            g.add_edge(sink, k + j, 1, Rational::zero());
        }
    }
    !g.has_negative_cycle()
}
