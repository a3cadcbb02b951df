//! Node-labeled undirected simple graphs and the dense matrices the solvers
//! consume.
//!
//! Graphs are immutable once built. Edges are stored normalized (`u < v`) and
//! sorted, so two graphs with the same edge set compare equal regardless of the
//! order the edges were supplied in.

use std::collections::BTreeSet;
use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Label assigned to every node of an unlabeled graph.
pub const UNLABELED: &str = "_";

const DUMMY_TOKEN: &str = "\u{0}dummy";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({u}, {v}) references a node outside 0..{n}")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {0} uses the reserved dummy label")]
    ReservedLabel(usize),
    #[error("cannot pad a {n}-node graph down to {target} nodes")]
    PadTarget { n: usize, target: usize },
    #[error("graph has neither labels nor a node count")]
    MissingNodes,
    #[error("node count {n} disagrees with {labels} labels")]
    CountMismatch { n: usize, labels: usize },
}

/// Categorical node label. Equality is exact string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    /// The padding label. It never compares equal to a user label.
    pub fn dummy() -> Self {
        Label(DUMMY_TOKEN.to_string())
    }

    pub fn is_dummy(&self) -> bool {
        self.0 == DUMMY_TOKEN
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dummy() {
            f.write_str("DUMMY")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dummy() {
            f.write_str("DUMMY")
        } else {
            f.write_str(&self.0)
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

/// Wire form of a graph: `{"id": .., "labels": [..], "edges": [[u, v], ..]}`.
///
/// `labels` may be omitted for unlabeled data as long as `n` gives the node
/// count; every node then gets [`UNLABELED`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default)]
    labels: Option<Vec<Label>>,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    id: Option<String>,
    labels: Vec<Label>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(raw: GraphJson) -> Result<Self, GraphError> {
        let labels = match (raw.labels, raw.n) {
            (Some(labels), Some(n)) if n != labels.len() => {
                return Err(GraphError::CountMismatch {
                    n,
                    labels: labels.len(),
                })
            }
            (Some(labels), _) => labels,
            (None, Some(n)) => vec![Label::new(UNLABELED); n],
            (None, None) => return Err(GraphError::MissingNodes),
        };
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = Graph::new(labels, &edges)?;
        g.id = raw.id;
        Ok(g)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            id: g.id,
            n: None,
            labels: Some(g.labels),
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl Graph {
    /// Builds a validated graph. Rejects self-loops, out-of-range endpoints,
    /// duplicate edges (in either orientation) and the reserved dummy label.
    pub fn new(labels: Vec<Label>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if let Some(i) = labels.iter().position(Label::is_dummy) {
            return Err(GraphError::ReservedLabel(i));
        }
        Self::build(labels, edges)
    }

    /// An unlabeled graph: every node carries [`UNLABELED`].
    pub fn unlabeled(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(vec![Label::new(UNLABELED); n], edges)
    }

    fn build(labels: Vec<Label>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EdgeOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            id: None,
            labels,
            edges,
            neighbors,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &Label {
        &self.labels[node]
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Appends `target_n - n` isolated nodes labeled DUMMY.
    pub fn pad_with_dummies(&self, target_n: usize) -> Result<Graph, GraphError> {
        let n = self.node_count();
        if target_n < n {
            return Err(GraphError::PadTarget {
                n,
                target: target_n,
            });
        }
        let mut padded = self.clone();
        padded.labels.resize(target_n, Label::dummy());
        padded.neighbors.resize(target_n, Vec::new());
        Ok(padded)
    }

    /// Dense symmetric 0/1 adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> Array2<f64> {
        let n = self.node_count();
        let mut a = Array2::zeros((n, n));
        for &(u, v) in &self.edges {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }
}

/// Two graphs with the smaller one first.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPair {
    pub g1: Graph,
    pub g2: Graph,
    /// Set when the inputs were exchanged to put the smaller graph first.
    pub swapped: bool,
    pub ground_truth_ged: Option<u64>,
    pub ground_truth_matchings: Option<Vec<crate::path::NodeMatching>>,
}

impl GraphPair {
    /// Number of nodes both graphs share after padding `g1`.
    pub fn n(&self) -> usize {
        self.g2.node_count()
    }

    /// The pair in the order the caller supplied it.
    pub fn original_order(&self) -> (&Graph, &Graph) {
        if self.swapped {
            (&self.g2, &self.g1)
        } else {
            (&self.g1, &self.g2)
        }
    }
}

/// Orders a pair so that `g1.node_count() <= g2.node_count()`. Equal sizes
/// keep the input order.
pub fn canonicalize_pair(g1: Graph, g2: Graph) -> GraphPair {
    let swapped = g1.node_count() > g2.node_count();
    let (g1, g2) = if swapped { (g2, g1) } else { (g1, g2) };
    GraphPair {
        g1,
        g2,
        swapped,
        ground_truth_ged: None,
        ground_truth_matchings: None,
    }
}

/// `n x n` matrix (n = n2) with entry 0 exactly when padded g1 node `i` and g2
/// node `k` carry the same label. Dummy rows are all ones.
pub fn label_mismatch_matrix(pair: &GraphPair) -> Array2<f64> {
    let n = pair.n();
    let n1 = pair.g1.node_count();
    Array2::from_shape_fn((n, n), |(i, k)| {
        if i < n1 && pair.g1.label(i) == pair.g2.label(k) {
            0.0
        } else {
            1.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<Label> {
        ls.iter().map(|&s| Label::new(s)).collect()
    }

    fn triangle() -> Graph {
        Graph::unlabeled(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert_eq!(Graph::unlabeled(3, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::unlabeled(3, &[(0, 3)]),
            Err(GraphError::EdgeOutOfRange { u: 0, v: 3, n: 3 })
        );
        assert_eq!(
            Graph::unlabeled(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        assert_eq!(
            Graph::new(vec![Label::new("a"), Label::dummy()], &[]),
            Err(GraphError::ReservedLabel(1))
        );
    }

    #[test]
    fn canonicalize_orders_by_size() {
        let g = triangle();
        let h = Graph::unlabeled(4, &[(0, 1)]).unwrap();
        let p = canonicalize_pair(g.clone(), h.clone());
        assert!(!p.swapped);
        assert_eq!((&p.g1, &p.g2), (&g, &h));

        let p = canonicalize_pair(h.clone(), g.clone());
        assert!(p.swapped);
        assert_eq!((&p.g1, &p.g2), (&g, &h));
        assert_eq!(p.original_order(), (&h, &g));

        let p = canonicalize_pair(g.clone(), g.clone());
        assert!(!p.swapped);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let g = triangle();
        let h = Graph::unlabeled(4, &[(0, 1)]).unwrap();
        let once = canonicalize_pair(h, g);
        let twice = canonicalize_pair(once.g1.clone(), once.g2.clone());
        assert_eq!((&once.g1, &once.g2), (&twice.g1, &twice.g2));
        assert!(!twice.swapped);
    }

    #[test]
    fn padding() {
        let t = triangle();
        let p = t.pad_with_dummies(4).unwrap();
        assert_eq!(p.node_count(), 4);
        assert!(p.label(3).is_dummy());
        assert_eq!(p.degree(3), 0);
        assert_eq!(p.edges(), t.edges());

        assert_eq!(t.pad_with_dummies(3).unwrap(), t);

        let empty = Graph::unlabeled(0, &[]).unwrap();
        let p = empty.pad_with_dummies(2).unwrap();
        assert_eq!(p.node_count(), 2);
        assert!(p.labels().iter().all(Label::is_dummy));
        assert_eq!(p.edge_count(), 0);

        assert_eq!(
            t.pad_with_dummies(2),
            Err(GraphError::PadTarget { n: 3, target: 2 })
        );
    }

    #[test]
    fn mismatch_matrix() {
        let g = Graph::unlabeled(3, &[(0, 1)]).unwrap();
        let pair = canonicalize_pair(g.clone(), g);
        assert!(label_mismatch_matrix(&pair).iter().all(|&x| x == 0.0));

        let g1 = Graph::new(labels(&["A", "B"]), &[]).unwrap();
        let g2 = Graph::new(labels(&["A", "C"]), &[]).unwrap();
        let m = label_mismatch_matrix(&canonicalize_pair(g1, g2));
        assert_eq!(m[[0, 0]], 0.0);
        assert_eq!(m[[1, 1]], 1.0);
        assert_eq!(m[[0, 1]], 1.0);

        let g1 = Graph::new(labels(&["A", "B", "C"]), &[(0, 1), (1, 2)]).unwrap();
        let g2 = Graph::new(labels(&["A", "B", "D", "E"]), &[(0, 1), (2, 3)]).unwrap();
        let m = label_mismatch_matrix(&canonicalize_pair(g1, g2));
        assert_eq!(m.dim(), (4, 4));
        assert!(m.row(3).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn adjacency_matrices() {
        let a = triangle().adjacency();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[[i, j]], if i == j { 0.0 } else { 1.0 });
            }
        }
        assert!(Graph::unlabeled(4, &[])
            .unwrap()
            .adjacency()
            .iter()
            .all(|&x| x == 0.0));

        let a = Graph::unlabeled(3, &[(0, 1), (1, 2)]).unwrap().adjacency();
        assert_eq!(a[[0, 1]], 1.0);
        assert_eq!(a[[1, 2]], 1.0);
        assert_eq!(a[[0, 2]], 0.0);
        assert_eq!(a, a.t());
    }

    #[test]
    fn json_forms() {
        let g: Graph =
            serde_json::from_str(r#"{"id":"q1","labels":["C","O"],"edges":[[1,0]]}"#).unwrap();
        assert_eq!(g.id(), Some("q1"));
        assert_eq!(g.edges(), &[(0, 1)]);
        let back = serde_json::to_string(&g).unwrap();
        assert_eq!(back, r#"{"id":"q1","labels":["C","O"],"edges":[[0,1]]}"#);

        let g: Graph = serde_json::from_str(r#"{"n":3,"edges":[[0,2]]}"#).unwrap();
        assert!(g.labels().iter().all(|l| l.as_str() == UNLABELED));

        let err = serde_json::from_str::<Graph>(r#"{"labels":["a"],"edges":[[0,0]]}"#);
        assert!(err.unwrap_err().to_string().contains("self-loop"));
    }
}
