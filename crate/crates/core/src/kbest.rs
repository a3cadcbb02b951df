//! k-best matching: rank node matchings by coupling weight through recursive
//! partitioning of the matching space, turn each into an edit path, and keep
//! the shortest.
//!
//! A subspace is described by forced (`included`) and forbidden (`excluded`)
//! pairs. Splitting a subspace on a pair `e` of its best matching that its
//! second-best lacks yields one child containing `e` (whose best is unchanged)
//! and one excluding it (whose best is the parent's second-best).

use std::collections::HashSet;

use ndarray::Array2;

use crate::graph::GraphPair;
use crate::ot::{lsap_min, OtError};
use crate::path::{ep_gen, ged_lower_bound, EditPath, NodeMatching, PathError};

/// Weights closer than this are treated as tied and broken lexicographically.
const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum KBestError {
    #[error("coupling is {rows}x{cols}, expected {n1}x{n2}")]
    Shape {
        rows: usize,
        cols: usize,
        n1: usize,
        n2: usize,
    },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Ot(#[from] OtError),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KBestConfig {
    pub k: usize,
    pub enable_pruning: bool,
}

impl Default for KBestConfig {
    fn default() -> Self {
        KBestConfig {
            k: 100,
            enable_pruning: true,
        }
    }
}

/// `sum_i pi[i, m[i]]`.
pub fn matching_weight(pi: &Array2<f64>, m: &NodeMatching) -> f64 {
    m.pairs().map(|(i, j)| pi[[i, j]]).sum()
}

fn max_weight(
    pi: &Array2<f64>,
    included: &[(usize, usize)],
    excluded: &[(usize, usize)],
) -> Result<NodeMatching, OtError> {
    let neg = pi.mapv(|x| -x);
    lsap_min(&neg, included, excluded).map(|(m, _)| m)
}

/// True when `a` should rank ahead of `b`: heavier, or tied and
/// lexicographically smaller.
fn ranks_before(a: (f64, &NodeMatching), b: (f64, &NodeMatching)) -> bool {
    if (a.0 - b.0).abs() <= WEIGHT_TOL {
        a.1 < b.1
    } else {
        a.0 > b.0
    }
}

/// Heaviest matching in the subspace other than `best`, found by re-solving
/// with each free pair of `best` excluded in turn.
fn second_best(
    pi: &Array2<f64>,
    included: &[(usize, usize)],
    excluded: &[(usize, usize)],
    best: &NodeMatching,
) -> Result<Option<NodeMatching>, OtError> {
    let mut winner: Option<(f64, NodeMatching)> = None;
    let mut extra = excluded.to_vec();
    for pair in best.pairs() {
        if included.contains(&pair) {
            continue;
        }
        extra.push(pair);
        match max_weight(pi, included, &extra) {
            Ok(m) => {
                let w = matching_weight(pi, &m);
                if winner
                    .as_ref()
                    .is_none_or(|(bw, bm)| ranks_before((w, &m), (*bw, bm)))
                {
                    winner = Some((w, m));
                }
            }
            Err(OtError::Infeasible) => {}
            Err(e) => return Err(e),
        }
        extra.pop();
    }
    Ok(winner.map(|(_, m)| m))
}

/// Best and second-best matchings (by weight) among those containing every
/// `included` pair and no `excluded` pair. The second is absent when the
/// subspace holds a single matching.
pub fn best_and_second(
    pi: &Array2<f64>,
    included: &[(usize, usize)],
    excluded: &[(usize, usize)],
) -> Result<(NodeMatching, Option<NodeMatching>), OtError> {
    let best = max_weight(pi, included, excluded)?;
    let second = second_best(pi, included, excluded, &best)?;
    Ok((best, second))
}

#[derive(Debug, Clone)]
pub struct Subspace {
    pub included: Vec<(usize, usize)>,
    pub excluded: Vec<(usize, usize)>,
    pub best: NodeMatching,
    pub second_best: Option<NodeMatching>,
    pub second_best_weight: f64,
    pub lower_bound: u64,
}

impl Subspace {
    fn new(
        pi: &Array2<f64>,
        included: Vec<(usize, usize)>,
        excluded: Vec<(usize, usize)>,
        best: NodeMatching,
        lower_bound: u64,
    ) -> Result<Self, OtError> {
        let second_best = second_best(pi, &included, &excluded, &best)?;
        let second_best_weight = second_best
            .as_ref()
            .map_or(f64::NEG_INFINITY, |m| matching_weight(pi, m));
        Ok(Subspace {
            included,
            excluded,
            best,
            second_best,
            second_best_weight,
            lower_bound,
        })
    }
}

#[derive(Debug, Clone)]
pub struct KBestResult {
    pub path: EditPath,
    pub matching: NodeMatching,
    pub ged_estimate: u64,
    /// Distinct matchings in the order they were first generated.
    pub discovered: Vec<NodeMatching>,
    pub splits: usize,
}

struct Incumbent<'a> {
    pair: &'a GraphPair,
    seen: HashSet<NodeMatching>,
    discovered: Vec<NodeMatching>,
    best: Option<(EditPath, NodeMatching)>,
}

impl Incumbent<'_> {
    fn offer(&mut self, m: &NodeMatching) -> Result<(), PathError> {
        if !self.seen.insert(m.clone()) {
            return Ok(());
        }
        self.discovered.push(m.clone());
        let path = ep_gen(self.pair, m)?;
        if self.best.as_ref().is_none_or(|(p, _)| path.len() < p.len()) {
            self.best = Some((path, m.clone()));
        }
        Ok(())
    }

    fn len(&self) -> u64 {
        self.best.as_ref().map_or(u64::MAX, |(p, _)| p.len() as u64)
    }
}

/// Shortest edit path over the matchings explored by `k - 1` splits of the
/// matching space ranked by `pi` (`n1 x n2`, dummy rows already removed).
pub fn kbest_gep(
    pair: &GraphPair,
    pi: &Array2<f64>,
    cfg: &KBestConfig,
) -> Result<KBestResult, KBestError> {
    let (n1, n2) = (pair.g1.node_count(), pair.g2.node_count());
    if pi.dim() != (n1, n2) {
        return Err(KBestError::Shape {
            rows: pi.nrows(),
            cols: pi.ncols(),
            n1,
            n2,
        });
    }
    if cfg.k == 0 {
        return Err(KBestError::ZeroK);
    }
    let lb = ged_lower_bound(pair);
    let mut inc = Incumbent {
        pair,
        seen: HashSet::new(),
        discovered: Vec::new(),
        best: None,
    };

    let first = max_weight(pi, &[], &[])?;
    let root = Subspace::new(pi, Vec::new(), Vec::new(), first, lb)?;
    inc.offer(&root.best)?;
    if let Some(m) = &root.second_best {
        inc.offer(m)?;
    }
    let mut spaces = vec![root];
    let mut splits = 0;

    for _ in 2..=cfg.k {
        let incumbent = inc.len();
        let mut chosen: Option<usize> = None;
        for (idx, s) in spaces.iter().enumerate() {
            if s.second_best.is_none() || (cfg.enable_pruning && s.lower_bound >= incumbent) {
                continue;
            }
            if chosen.is_none_or(|c| s.second_best_weight > spaces[c].second_best_weight) {
                chosen = Some(idx);
            }
        }
        let Some(idx) = chosen else { break };

        let parent = spaces[idx].clone();
        let second = parent
            .second_best
            .clone()
            .expect("chosen subspace is splittable");
        let row = parent
            .best
            .pairs()
            .position(|(i, j)| second.as_slice()[i] != j)
            .expect("best and second-best differ");
        let e = (row, parent.best.as_slice()[row]);

        let mut with_e = parent.included.clone();
        with_e.push(e);
        let mut without_e = parent.excluded.clone();
        without_e.push(e);
        let keep = Subspace::new(pi, with_e, parent.excluded.clone(), parent.best.clone(), lb)?;
        let rest = Subspace::new(
            pi,
            parent.included.clone(),
            without_e,
            second,
            parent.lower_bound,
        )?;

        for m in [&keep.second_best, &rest.second_best].into_iter().flatten() {
            inc.offer(m)?;
        }
        spaces[idx] = keep;
        spaces.push(rest);
        splits += 1;
    }

    let (path, matching) = inc.best.expect("at least one matching is evaluated");
    Ok(KBestResult {
        ged_estimate: path.len() as u64,
        path,
        matching,
        discovered: inc.discovered,
        splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonicalize_pair, Graph, Label};
    use ndarray::array;

    #[test]
    fn weights() {
        let id = Array2::eye(3);
        assert_eq!(matching_weight(&id, &NodeMatching::identity(3)), 3.0);
        let zero = Array2::zeros((3, 4));
        assert_eq!(
            matching_weight(&zero, &NodeMatching::new(vec![3, 0, 1])),
            0.0
        );
    }

    #[test]
    fn two_by_two_ranking() {
        let pi = array![[0.9, 0.1], [0.2, 0.8]];
        let (best, second) = best_and_second(&pi, &[], &[]).unwrap();
        assert_eq!(best.as_slice(), &[0, 1]);
        assert!((matching_weight(&pi, &best) - 1.7).abs() < 1e-12);
        let second = second.unwrap();
        assert_eq!(second.as_slice(), &[1, 0]);
        assert!((matching_weight(&pi, &second) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn singleton_subspace() {
        let pi = array![[0.9, 0.1], [0.2, 0.8]];
        let (best, second) = best_and_second(&pi, &[], &[(0, 0)]).unwrap();
        assert_eq!(best.as_slice(), &[1, 0]);
        assert!(second.is_none());
    }

    #[test]
    fn binary_coupling_with_k1_follows_it() {
        let g1 = Graph::new(vec!["A".into(), "B".into(), "C".into()], &[(0, 1), (1, 2)]).unwrap();
        let g2 = Graph::new(
            vec!["A".into(), "B".into(), "D".into(), "E".into()],
            &[(0, 1), (2, 3)],
        )
        .unwrap();
        let pair = canonicalize_pair(g1, g2);
        let mut pi = Array2::zeros((3, 4));
        for i in 0..3 {
            pi[[i, i]] = 1.0;
        }
        let cfg = KBestConfig {
            k: 1,
            enable_pruning: true,
        };
        let r = kbest_gep(&pair, &pi, &cfg).unwrap();
        assert_eq!(r.ged_estimate, 4);
        assert_eq!(r.matching.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn shape_and_k_errors() {
        let g = Graph::new(vec![Label::new("a")], &[]).unwrap();
        let pair = canonicalize_pair(g.clone(), g);
        let bad = Array2::zeros((2, 1));
        assert!(matches!(
            kbest_gep(&pair, &bad, &KBestConfig::default()),
            Err(KBestError::Shape { .. })
        ));
        let ok = Array2::ones((1, 1));
        let zero_k = KBestConfig {
            k: 0,
            enable_pruning: false,
        };
        assert_eq!(
            kbest_gep(&pair, &ok, &zero_k).unwrap_err(),
            KBestError::ZeroK
        );
    }

    #[test]
    fn empty_first_graph() {
        let g1 = Graph::unlabeled(0, &[]).unwrap();
        let g2 = Graph::unlabeled(2, &[(0, 1)]).unwrap();
        let pair = canonicalize_pair(g1, g2);
        let r = kbest_gep(&pair, &Array2::zeros((0, 2)), &KBestConfig::default()).unwrap();
        assert_eq!(r.ged_estimate, 3);
    }
}
