//! Synthetic pairs with a known edit budget: apply `delta` random edits to a
//! graph and record `delta` as an upper bound on the distance.
//!
//! Edits never undo each other: a node is relabeled at most once, inserted
//! nodes are never relabeled or deleted, each node pair has at most one edge
//! edit, and only original, isolated, never-relabeled nodes are deleted.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::DatasetLine;
use crate::graph::{Graph, Label};
use crate::path::{EditOp, EditPath};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("delta must be at least 1")]
    ZeroDelta,
    #[error("op weights must be nonnegative with a positive sum")]
    Weights,
    #[error("no applicable edit after {0} draws")]
    Exhausted(usize),
}

/// Relative frequencies of the five edit kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpWeights {
    pub relabel: f64,
    pub insert_node: f64,
    pub delete_node: f64,
    pub insert_edge: f64,
    pub delete_edge: f64,
}

impl Default for OpWeights {
    fn default() -> Self {
        OpWeights {
            relabel: 1.0,
            insert_node: 1.0,
            delete_node: 1.0,
            insert_edge: 1.0,
            delete_edge: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub delta: usize,
    pub seed: u64,
    pub weights: OpWeights,
    /// Labels for relabels and inserted nodes. Defaults to the labels of the
    /// base graph.
    pub alphabet: Option<Vec<Label>>,
    /// Consecutive failed draws tolerated before giving up.
    pub max_retries: usize,
}

impl SynthSpec {
    pub fn new(delta: usize, seed: u64) -> Self {
        SynthSpec {
            delta,
            seed,
            weights: OpWeights::default(),
            alphabet: None,
            max_retries: 200,
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Relabel,
    InsertNode,
    DeleteNode,
    InsertEdge,
    DeleteEdge,
}

const KINDS: [Kind; 5] = [
    Kind::Relabel,
    Kind::InsertNode,
    Kind::DeleteNode,
    Kind::InsertEdge,
    Kind::DeleteEdge,
];

struct Editing {
    labels: Vec<Option<Label>>,
    original: usize,
    edges: BTreeSet<(usize, usize)>,
    touched: BTreeSet<(usize, usize)>,
    relabeled: Vec<bool>,
}

impl Editing {
    fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_some())
    }

    fn isolated(&self, u: usize) -> bool {
        !self.edges.iter().any(|&(a, b)| a == u || b == u)
    }

    /// Attempts one edit of `kind`; `None` when nothing qualifies.
    fn try_edit(&mut self, kind: Kind, alphabet: &[Label], rng: &mut ChaCha8Rng) -> Option<EditOp> {
        match kind {
            Kind::Relabel => {
                let nodes: Vec<usize> = self
                    .alive()
                    .filter(|&u| u < self.original && !self.relabeled[u])
                    .collect();
                let &node = nodes.choose(rng)?;
                let current = self.labels[node].clone()?;
                let options: Vec<&Label> = alphabet.iter().filter(|l| **l != current).collect();
                let label = (*options.choose(rng)?).clone();
                self.labels[node] = Some(label.clone());
                self.relabeled[node] = true;
                Some(EditOp::Relabel { node, label })
            }
            Kind::InsertNode => {
                let label = alphabet.choose(rng)?.clone();
                self.labels.push(Some(label.clone()));
                self.relabeled.push(false);
                Some(EditOp::InsertNode { label })
            }
            Kind::DeleteNode => {
                let nodes: Vec<usize> = self
                    .alive()
                    .filter(|&u| u < self.original && !self.relabeled[u] && self.isolated(u))
                    .collect();
                let &node = nodes.choose(rng)?;
                self.labels[node] = None;
                Some(EditOp::DeleteNode { node })
            }
            Kind::InsertEdge => {
                let alive: Vec<usize> = self.alive().collect();
                let mut free = Vec::new();
                for (i, &u) in alive.iter().enumerate() {
                    for &v in &alive[i + 1..] {
                        if !self.edges.contains(&(u, v)) && !self.touched.contains(&(u, v)) {
                            free.push((u, v));
                        }
                    }
                }
                let &(u, v) = free.choose(rng)?;
                self.edges.insert((u, v));
                self.touched.insert((u, v));
                Some(EditOp::InsertEdge { u, v })
            }
            Kind::DeleteEdge => {
                let candidates: Vec<(usize, usize)> = self
                    .edges
                    .iter()
                    .filter(|e| !self.touched.contains(e))
                    .copied()
                    .collect();
                let &(u, v) = candidates.choose(rng)?;
                self.edges.remove(&(u, v));
                self.touched.insert((u, v));
                Some(EditOp::DeleteEdge { u, v })
            }
        }
    }

    /// Compacts surviving nodes, keeping their relative order.
    fn finish(self) -> Graph {
        let mut index = vec![usize::MAX; self.labels.len()];
        let mut labels = Vec::new();
        for (i, l) in self.labels.into_iter().enumerate() {
            if let Some(l) = l {
                index[i] = labels.len();
                labels.push(l);
            }
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (index[u], index[v]))
            .collect();
        Graph::new(labels, &edges).expect("edits preserve validity")
    }
}

/// Applies `spec.delta` random edits to `g`. The returned line holds `g` as
/// `g1`, the edited graph as `g2`, `ged = delta` flagged approximate, and the
/// edit sequence (nodes indexed as in [`crate::path::check_against`]: deleted
/// nodes keep their slot, inserted ones are appended).
pub fn synth_pair(g: &Graph, spec: &SynthSpec) -> Result<DatasetLine, SynthError> {
    if spec.delta == 0 {
        return Err(SynthError::ZeroDelta);
    }
    let w = spec.weights;
    let weights = [
        w.relabel,
        w.insert_node,
        w.delete_node,
        w.insert_edge,
        w.delete_edge,
    ];
    let pick = WeightedIndex::new(weights).map_err(|_| SynthError::Weights)?;
    let alphabet: Vec<Label> = match &spec.alphabet {
        Some(a) => a.clone(),
        None => g
            .labels()
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = Editing {
        labels: g.labels().iter().cloned().map(Some).collect(),
        original: g.node_count(),
        edges: g.edges().iter().copied().collect(),
        touched: BTreeSet::new(),
        relabeled: vec![false; g.node_count()],
    };
    let mut ops = Vec::with_capacity(spec.delta);
    let mut failures = 0;
    while ops.len() < spec.delta {
        match state.try_edit(KINDS[pick.sample(&mut rng)], &alphabet, &mut rng) {
            Some(op) => {
                ops.push(op);
                failures = 0;
            }
            None => {
                failures += 1;
                if failures > spec.max_retries {
                    return Err(SynthError::Exhausted(spec.max_retries));
                }
            }
        }
    }
    let mut line = DatasetLine::new(g.clone(), state.finish());
    line.ged = Some(spec.delta as u64);
    line.approximate = true;
    line.edits = Some(EditPath { ops });
    Ok(line)
}

/// Erdos-Renyi graph with `n` nodes, edge probability `p` and labels drawn
/// uniformly from `alphabet`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, alphabet: &[Label]) -> Graph {
    let labels = (0..n)
        .map(|_| alphabet.choose(rng).expect("alphabet is nonempty").clone())
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(labels, &edges).expect("generated edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::check_against;

    fn alphabet() -> Vec<Label> {
        ["A", "B", "C"].into_iter().map(Label::new).collect()
    }

    fn replay_ok(line: &DatasetLine) -> bool {
        let edits = line.edits.as_ref().unwrap();
        // Slots that survive map to consecutive g2 indices.
        let mut alive: Vec<bool> = vec![true; line.g1.node_count()];
        for op in &edits.ops {
            match op {
                EditOp::InsertNode { .. } => alive.push(true),
                EditOp::DeleteNode { node } => alive[*node] = false,
                _ => {}
            }
        }
        let mut corr = vec![None; alive.len()];
        let mut next = 0;
        for (slot, &a) in alive.iter().enumerate() {
            if a {
                corr[slot] = Some(next);
                next += 1;
            }
        }
        check_against(&line.g1, edits, &line.g2, |x| {
            corr.get(x).copied().flatten()
        })
        .is_ok()
    }

    #[test]
    fn zero_delta_rejected() {
        let g = Graph::unlabeled(2, &[]).unwrap();
        assert_eq!(
            synth_pair(&g, &SynthSpec::new(0, 1)).unwrap_err(),
            SynthError::ZeroDelta
        );
    }

    #[test]
    fn deterministic_and_replayable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..50 {
            let g = random_graph(&mut rng, 5, 0.4, &alphabet());
            let mut spec = SynthSpec::new(4, seed);
            spec.alphabet = Some(alphabet());
            let a = synth_pair(&g, &spec).unwrap();
            let b = synth_pair(&g, &spec).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.edits.as_ref().unwrap().len(), 4);
            assert!(a.approximate);
            assert!(replay_ok(&a), "seed {seed}: {:?}", a.edits);
        }
    }

    #[test]
    fn impossible_edits_exhaust() {
        let g = Graph::unlabeled(1, &[]).unwrap();
        let mut spec = SynthSpec::new(1, 0);
        spec.weights = OpWeights {
            relabel: 1.0,
            insert_node: 0.0,
            delete_node: 0.0,
            insert_edge: 0.0,
            delete_edge: 0.0,
        };
        assert_eq!(
            synth_pair(&g, &spec).unwrap_err(),
            SynthError::Exhausted(200)
        );
        spec.weights.relabel = 0.0;
        assert_eq!(synth_pair(&g, &spec).unwrap_err(), SynthError::Weights);
    }

    #[test]
    fn relabel_only_changes_labels() {
        let g = Graph::new(alphabet(), &[(0, 1)]).unwrap();
        let mut spec = SynthSpec::new(1, 9);
        spec.weights = OpWeights {
            relabel: 1.0,
            insert_node: 0.0,
            delete_node: 0.0,
            insert_edge: 0.0,
            delete_edge: 0.0,
        };
        let line = synth_pair(&g, &spec).unwrap();
        assert_eq!(line.g2.edges(), g.edges());
        let diff = (0..3).filter(|&i| line.g2.label(i) != g.label(i)).count();
        assert_eq!(diff, 1);
    }
}
