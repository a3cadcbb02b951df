//! Exact GED for small graphs by branch and bound over node injections.
//!
//! Padding `g1` with isolated dummy nodes turns every bijection of the padded
//! problem into an injection of the real nodes plus `n2 - n1` insertions, so
//! the search only enumerates injections. All costs are integers.

use thiserror::Error;

use crate::graph::GraphPair;
use crate::path::NodeMatching;

pub const DEFAULT_MAX_NODES: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error(
        "graph has {nodes} nodes, exact search is limited to {max}; use an approximate method"
    )]
    TooLarge { nodes: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub ged: u64,
    /// Optimal matchings in lexicographic order, at most `matching_cap`.
    pub optimal_matchings: Vec<NodeMatching>,
    /// Complete injections whose cost was evaluated.
    pub enumerated_count: u64,
}

struct Search<'a> {
    adj1: Vec<Vec<bool>>,
    adj2: Vec<Vec<bool>>,
    relabel: Vec<Vec<u64>>,
    /// Edges with an unmatched endpoint must be inserted.
    g2_edges: &'a [(usize, usize)],
    n2: usize,
    cap: usize,
    map: Vec<usize>,
    used: Vec<bool>,
    best: u64,
    found: Vec<NodeMatching>,
    leaves: u64,
}

impl Search<'_> {
    fn leaf_cost(&self) -> u64 {
        let inserted = (self.n2 - self.map.len()) as u64;
        let dangling = self
            .g2_edges
            .iter()
            .filter(|&&(a, b)| !self.used[a] || !self.used[b])
            .count() as u64;
        inserted + dangling
    }

    fn dfs(&mut self, partial: u64) {
        let depth = self.map.len();
        if depth == self.adj1.len() {
            self.leaves += 1;
            let cost = partial + self.leaf_cost();
            if cost < self.best {
                self.best = cost;
                self.found.clear();
            }
            if cost == self.best && self.found.len() < self.cap {
                self.found.push(NodeMatching::new(self.map.clone()));
            }
            return;
        }
        for v in 0..self.n2 {
            if self.used[v] {
                continue;
            }
            let mut cost = partial + self.relabel[depth][v];
            for (w, &vw) in self.map.iter().enumerate() {
                if self.adj1[depth][w] != self.adj2[v][vw] {
                    cost += 1;
                }
            }
            if cost > self.best || (cost == self.best && self.found.len() >= self.cap) {
                continue;
            }
            self.used[v] = true;
            self.map.push(v);
            self.dfs(cost);
            self.map.pop();
            self.used[v] = false;
        }
    }
}

/// Exact GED of a canonical pair together with up to `matching_cap` optimal
/// matchings of `g1` into `g2`.
pub fn exact_ged(
    pair: &GraphPair,
    max_nodes: usize,
    matching_cap: usize,
) -> Result<ExactResult, ExactError> {
    let (g1, g2) = (&pair.g1, &pair.g2);
    let nodes = g1.node_count().max(g2.node_count());
    if nodes > max_nodes {
        return Err(ExactError::TooLarge {
            nodes,
            max: max_nodes,
        });
    }
    let adj = |g: &crate::graph::Graph| -> Vec<Vec<bool>> {
        (0..g.node_count())
            .map(|u| (0..g.node_count()).map(|v| g.has_edge(u, v)).collect())
            .collect()
    };
    let relabel = (0..g1.node_count())
        .map(|u| {
            (0..g2.node_count())
                .map(|v| u64::from(g1.label(u) != g2.label(v)))
                .collect()
        })
        .collect();
    let mut s = Search {
        adj1: adj(g1),
        adj2: adj(g2),
        relabel,
        g2_edges: g2.edges(),
        n2: g2.node_count(),
        cap: matching_cap,
        map: Vec::with_capacity(g1.node_count()),
        used: vec![false; g2.node_count()],
        best: u64::MAX,
        found: Vec::new(),
        leaves: 0,
    };
    s.dfs(0);
    Ok(ExactResult {
        ged: s.best,
        optimal_matchings: s.found,
        enumerated_count: s.leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonicalize_pair, Graph, Label};
    use crate::path::ep_gen;

    fn labeled(ls: &[&str], edges: &[(usize, usize)]) -> Graph {
        Graph::new(ls.iter().map(|&s| Label::new(s)).collect(), edges).unwrap()
    }

    #[test]
    fn identical_graphs() {
        let g = labeled(&["A", "B", "A"], &[(0, 1), (1, 2)]);
        let r = exact_ged(&canonicalize_pair(g.clone(), g), 9, 10).unwrap();
        assert_eq!(r.ged, 0);
        assert!(r.optimal_matchings.contains(&NodeMatching::identity(3)));
    }

    #[test]
    fn single_nodes() {
        let r = exact_ged(
            &canonicalize_pair(labeled(&["x"], &[]), labeled(&["y"], &[])),
            9,
            1,
        )
        .unwrap();
        assert_eq!(r.ged, 1);
    }

    #[test]
    fn worked_pair() {
        let pair = canonicalize_pair(
            labeled(&["A", "B", "C"], &[(0, 1), (1, 2)]),
            labeled(&["A", "B", "D", "E"], &[(0, 1), (2, 3)]),
        );
        let r = exact_ged(&pair, 9, 100).unwrap();
        assert_eq!(r.ged, 4);
        for m in &r.optimal_matchings {
            assert_eq!(ep_gen(&pair, m).unwrap().len(), 4);
        }
        assert!(r.optimal_matchings.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_graphs() {
        let e = Graph::unlabeled(0, &[]).unwrap();
        let g = Graph::unlabeled(3, &[(0, 1)]).unwrap();
        let r = exact_ged(&canonicalize_pair(e, g), 9, 5).unwrap();
        assert_eq!(r.ged, 4);
        assert_eq!(r.enumerated_count, 1);
    }

    #[test]
    fn size_limit() {
        let g = Graph::unlabeled(10, &[]).unwrap();
        let small = Graph::unlabeled(1, &[]).unwrap();
        assert_eq!(
            exact_ged(&canonicalize_pair(small, g), 9, 1),
            Err(ExactError::TooLarge { nodes: 10, max: 9 })
        );
    }
}
