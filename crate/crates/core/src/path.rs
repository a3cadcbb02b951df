//! Edit paths derived from node matchings.
//!
//! A [`NodeMatching`] sends every node of the smaller graph `g1` to a distinct
//! node of `g2`. [`ep_gen`] turns it into the induced edit operations in time
//! linear in `n2 + m1 + m2`; [`check_path`] replays a path and compares the
//! result against `g2`.
//!
//! Node indices in a canonical path refer to `g1`'s frame: original nodes keep
//! their index, inserted nodes are numbered `n1, n1 + 1, ..` in emission order.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphPair, Label};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("matching has {got} entries, expected {expected}")]
    MatchingLength { expected: usize, got: usize },
    #[error("matching sends node {node} to {target}, outside 0..{n2}")]
    MatchingRange {
        node: usize,
        target: usize,
        n2: usize,
    },
    #[error("matching sends two nodes to {0}")]
    NotInjective(usize),
}

/// Why a replayed path failed to reproduce the target graph.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("step {step}: {reason}")]
    IllFormed { step: usize, reason: String },
    #[error("replayed graph differs from target: {0}")]
    Mismatch(String),
}

/// Injection from `g1`'s nodes into `g2`'s: `map[i]` is the image of node `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeMatching(Vec<usize>);

impl NodeMatching {
    pub fn new(map: Vec<usize>) -> Self {
        NodeMatching(map)
    }

    pub fn identity(n: usize) -> Self {
        NodeMatching((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied().enumerate()
    }

    /// Checks that this is an injection from `0..n1` into `0..n2`.
    pub fn validate(&self, n1: usize, n2: usize) -> Result<(), PathError> {
        if self.0.len() != n1 {
            return Err(PathError::MatchingLength {
                expected: n1,
                got: self.0.len(),
            });
        }
        let mut seen = vec![false; n2];
        for (node, &target) in self.0.iter().enumerate() {
            if target >= n2 {
                return Err(PathError::MatchingRange { node, target, n2 });
            }
            if std::mem::replace(&mut seen[target], true) {
                return Err(PathError::NotInjective(target));
            }
        }
        Ok(())
    }

    /// `inverse[v]` is the g1 node sent to `v`, if any.
    pub fn inverse(&self, n2: usize) -> Vec<Option<usize>> {
        let mut inv = vec![None; n2];
        for (u, v) in self.pairs() {
            inv[v] = Some(u);
        }
        inv
    }

    /// g2 nodes with no preimage, ascending.
    pub fn unmatched(&self, n2: usize) -> Vec<usize> {
        self.inverse(n2)
            .iter()
            .enumerate()
            .filter_map(|(v, u)| u.is_none().then_some(v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Relabel { node: usize, label: Label },
    InsertNode { label: Label },
    DeleteNode { node: usize },
    DeleteEdge { u: usize, v: usize },
    InsertEdge { u: usize, v: usize },
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditOp::Relabel { node, label } => write!(f, "relabel {node} -> {label}"),
            EditOp::InsertNode { label } => write!(f, "insert node ({label})"),
            EditOp::DeleteNode { node } => write!(f, "delete node {node}"),
            EditOp::DeleteEdge { u, v } => write!(f, "delete edge ({u}, {v})"),
            EditOp::InsertEdge { u, v } => write!(f, "insert edge ({u}, {v})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditPath {
    pub ops: Vec<EditOp>,
}

impl EditPath {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Generates the edit path induced by `m` on a canonical pair.
///
/// Emission order: relabels, node insertions, edge deletions, edge insertions,
/// each ascending. Edge insertions follow `g2`'s edge order.
pub fn ep_gen(pair: &GraphPair, m: &NodeMatching) -> Result<EditPath, PathError> {
    let (g1, g2) = (&pair.g1, &pair.g2);
    let (n1, n2) = (g1.node_count(), g2.node_count());
    m.validate(n1, n2)?;
    let map = m.as_slice();
    let mut ops = Vec::new();

    for (u, &v) in map.iter().enumerate() {
        if g1.label(u) != g2.label(v) {
            ops.push(EditOp::Relabel {
                node: u,
                label: g2.label(v).clone(),
            });
        }
    }

    // Position of each g2 node in g1's frame.
    let mut frame = vec![usize::MAX; n2];
    for (u, &v) in map.iter().enumerate() {
        frame[v] = u;
    }
    let mut next = n1;
    for (v, slot) in frame.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
            ops.push(EditOp::InsertNode {
                label: g2.label(v).clone(),
            });
        }
    }

    for &(u, w) in g1.edges() {
        if !g2.has_edge(map[u], map[w]) {
            ops.push(EditOp::DeleteEdge { u, v: w });
        }
    }
    for &(v, w) in g2.edges() {
        let (a, b) = (frame[v], frame[w]);
        if a < n1 && b < n1 && g1.has_edge(a, b) {
            continue;
        }
        ops.push(EditOp::InsertEdge {
            u: a.min(b),
            v: a.max(b),
        });
    }
    Ok(EditPath { ops })
}

/// Label-multiset lower bound on GED:
/// `max(n1, n2) - |L(V1) ∩ L(V2)| + ||E1| - |E2||`.
///
/// Each node operation repairs at most one unmatched label and each edge
/// operation changes the edge count by one.
pub fn ged_lower_bound(pair: &GraphPair) -> u64 {
    let (g1, g2) = (&pair.g1, &pair.g2);
    let mut counts: BTreeMap<&Label, (usize, usize)> = BTreeMap::new();
    for l in g1.labels().iter().filter(|l| !l.is_dummy()) {
        counts.entry(l).or_default().0 += 1;
    }
    for l in g2.labels().iter().filter(|l| !l.is_dummy()) {
        counts.entry(l).or_default().1 += 1;
    }
    let common: usize = counts.values().map(|&(a, b)| a.min(b)).sum();
    let n1 = g1.labels().iter().filter(|l| !l.is_dummy()).count();
    let n2 = g2.labels().iter().filter(|l| !l.is_dummy()).count();
    (n1.max(n2) - common + g1.edge_count().abs_diff(g2.edge_count())) as u64
}

/// Mutable graph used to replay a path. Deleted nodes keep their slot.
#[derive(Debug, Clone)]
struct Replay {
    labels: Vec<Option<Label>>,
    edges: HashSet<(usize, usize)>,
}

impl Replay {
    fn from_graph(g: &Graph) -> Self {
        Replay {
            labels: g.labels().iter().cloned().map(Some).collect(),
            edges: g.edges().iter().copied().collect(),
        }
    }

    fn alive(&self, node: usize) -> bool {
        matches!(self.labels.get(node), Some(Some(_)))
    }

    fn apply(&mut self, op: &EditOp) -> Result<(), String> {
        let key = |u: usize, v: usize| (u.min(v), u.max(v));
        match op {
            EditOp::Relabel { node, label } => {
                if !self.alive(*node) {
                    return Err(format!("relabel of missing node {node}"));
                }
                self.labels[*node] = Some(label.clone());
            }
            EditOp::InsertNode { label } => self.labels.push(Some(label.clone())),
            EditOp::DeleteNode { node } => {
                if !self.alive(*node) {
                    return Err(format!("delete of missing node {node}"));
                }
                if self.edges.iter().any(|&(a, b)| a == *node || b == *node) {
                    return Err(format!("delete of node {node} with incident edges"));
                }
                self.labels[*node] = None;
            }
            EditOp::DeleteEdge { u, v } => {
                if !self.edges.remove(&key(*u, *v)) {
                    return Err(format!("delete of missing edge ({u}, {v})"));
                }
            }
            EditOp::InsertEdge { u, v } => {
                if u == v || !self.alive(*u) || !self.alive(*v) {
                    return Err(format!("insert of invalid edge ({u}, {v})"));
                }
                if !self.edges.insert(key(*u, *v)) {
                    return Err(format!("insert of existing edge ({u}, {v})"));
                }
            }
        }
        Ok(())
    }
}

/// Replays `path` on `source` and checks the result equals `target` when
/// surviving frame node `x` is identified with `target` node `corr(x)`.
pub fn check_against(
    source: &Graph,
    path: &EditPath,
    target: &Graph,
    corr: impl Fn(usize) -> Option<usize>,
) -> Result<(), VerifyError> {
    let mut state = Replay::from_graph(source);
    for (step, op) in path.ops.iter().enumerate() {
        state
            .apply(op)
            .map_err(|reason| VerifyError::IllFormed { step, reason })?;
    }
    let mut hit = vec![false; target.node_count()];
    for (x, label) in state.labels.iter().enumerate() {
        let Some(label) = label else { continue };
        let t = corr(x)
            .filter(|&t| t < target.node_count())
            .ok_or_else(|| VerifyError::Mismatch(format!("node {x} has no counterpart")))?;
        if std::mem::replace(&mut hit[t], true) {
            return Err(VerifyError::Mismatch(format!("target node {t} hit twice")));
        }
        if label != target.label(t) {
            return Err(VerifyError::Mismatch(format!(
                "node {x} labeled {label}, target node {t} labeled {}",
                target.label(t)
            )));
        }
    }
    if let Some(t) = hit.iter().position(|h| !h) {
        return Err(VerifyError::Mismatch(format!(
            "target node {t} not produced"
        )));
    }
    if state.edges.len() != target.edge_count() {
        return Err(VerifyError::Mismatch(format!(
            "{} edges, target has {}",
            state.edges.len(),
            target.edge_count()
        )));
    }
    for &(a, b) in &state.edges {
        let (ta, tb) = (corr(a).unwrap(), corr(b).unwrap());
        if !target.has_edge(ta, tb) {
            return Err(VerifyError::Mismatch(format!(
                "edge ({a}, {b}) absent from target"
            )));
        }
    }
    Ok(())
}

/// Checks a canonical-direction path: inserted nodes stand for the unmatched
/// g2 nodes in ascending order.
pub fn check_path(pair: &GraphPair, path: &EditPath, m: &NodeMatching) -> Result<(), VerifyError> {
    let (n1, n2) = (pair.g1.node_count(), pair.g2.node_count());
    m.validate(n1, n2)
        .map_err(|e| VerifyError::Mismatch(e.to_string()))?;
    let unmatched = m.unmatched(n2);
    let corr = |x: usize| {
        if x < n1 {
            Some(m.as_slice()[x])
        } else {
            unmatched.get(x - n1).copied()
        }
    };
    check_against(&pair.g1, path, &pair.g2, corr)
}

pub fn verify_path(pair: &GraphPair, path: &EditPath, m: &NodeMatching) -> bool {
    check_path(pair, path, m).is_ok()
}

/// Rewrites a canonical path so that it transforms `g2` into `g1` instead,
/// in `g2`'s index frame. Insertions become deletions and relabels are
/// retargeted; the length is unchanged.
///
/// Order: edge deletions, node deletions, relabels, edge insertions.
pub fn invert_path(pair: &GraphPair, m: &NodeMatching, path: &EditPath) -> EditPath {
    let n1 = pair.g1.node_count();
    let map = m.as_slice();
    let unmatched = m.unmatched(pair.g2.node_count());
    let to_g2 = |x: usize| if x < n1 { map[x] } else { unmatched[x - n1] };
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    let mut del_edges = Vec::new();
    let mut del_nodes = Vec::new();
    let mut relabels = Vec::new();
    let mut ins_edges = Vec::new();
    let mut inserted = 0;
    for op in &path.ops {
        match op {
            EditOp::Relabel { node, .. } => {
                relabels.push((map[*node], pair.g1.label(*node).clone()));
            }
            EditOp::InsertNode { .. } => {
                del_nodes.push(unmatched[inserted]);
                inserted += 1;
            }
            EditOp::DeleteEdge { u, v } => ins_edges.push(key(map[*u], map[*v])),
            EditOp::InsertEdge { u, v } => del_edges.push(key(to_g2(*u), to_g2(*v))),
            EditOp::DeleteNode { .. } => unreachable!("canonical paths never delete nodes"),
        }
    }
    del_edges.sort_unstable();
    del_nodes.sort_unstable();
    relabels.sort();
    ins_edges.sort_unstable();

    let ops = del_edges
        .into_iter()
        .map(|(u, v)| EditOp::DeleteEdge { u, v })
        .chain(
            del_nodes
                .into_iter()
                .map(|node| EditOp::DeleteNode { node }),
        )
        .chain(
            relabels
                .into_iter()
                .map(|(node, label)| EditOp::Relabel { node, label }),
        )
        .chain(
            ins_edges
                .into_iter()
                .map(|(u, v)| EditOp::InsertEdge { u, v }),
        )
        .collect();
    EditPath { ops }
}

/// The path for `m` in the caller's orientation: it transforms the first graph
/// the caller supplied into the second.
pub fn user_path(pair: &GraphPair, m: &NodeMatching) -> Result<EditPath, PathError> {
    let path = ep_gen(pair, m)?;
    Ok(if pair.swapped {
        invert_path(pair, m, &path)
    } else {
        path
    })
}

/// Verifies a path in the caller's orientation (see [`user_path`]).
pub fn check_user_path(
    pair: &GraphPair,
    path: &EditPath,
    m: &NodeMatching,
) -> Result<(), VerifyError> {
    if !pair.swapped {
        return check_path(pair, path, m);
    }
    m.validate(pair.g1.node_count(), pair.g2.node_count())
        .map_err(|e| VerifyError::Mismatch(e.to_string()))?;
    let inverse = m.inverse(pair.g2.node_count());
    check_against(&pair.g2, path, &pair.g1, |x| {
        inverse.get(x).copied().flatten()
    })
}
