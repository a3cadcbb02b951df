//! Helpers shared by the integration tests: random pairs and brute-force
//! oracles that do not reuse the library's search code.
#![allow(dead_code)]

use gedot::graph::{canonicalize_pair, Graph, GraphPair, Label};
use gedot::path::{ep_gen, NodeMatching};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|&s| Label::new(s)).collect()
}

pub fn random_graph(rng: &mut impl Rng, n: usize, alphabet: &[Label]) -> Graph {
    let p = rng.random_range(0.15..0.6);
    gedot::synth::random_graph(rng, n, p, alphabet)
}

/// Pair with node counts drawn from `1..=max_n` and labels from a
/// three-letter alphabet.
pub fn random_pair(rng: &mut impl Rng, max_n: usize) -> GraphPair {
    let alphabet = labels(&["A", "B", "C"]);
    let n1 = rng.random_range(1..=max_n);
    let n2 = rng.random_range(1..=max_n);
    let g1 = random_graph(rng, n1, &alphabet);
    let g2 = random_graph(rng, n2, &alphabet);
    canonicalize_pair(g1, g2)
}

/// Every injection of `0..n1` into `0..n2`, in lexicographic order.
pub fn injections(n1: usize, n2: usize) -> Vec<Vec<usize>> {
    fn rec(
        n1: usize,
        n2: usize,
        cur: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == n1 {
            out.push(cur.clone());
            return;
        }
        for v in 0..n2 {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n1, n2, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n1, n2, &mut Vec::new(), &mut vec![false; n2], &mut out);
    out
}

/// Minimum induced path length over all injections.
pub fn brute_force_ged(pair: &GraphPair) -> u64 {
    injections(pair.g1.node_count(), pair.g2.node_count())
        .into_iter()
        .map(|m| ep_gen(pair, &NodeMatching::new(m)).unwrap().len() as u64)
        .min()
        .unwrap()
}

/// Counts edit operations directly from the definition: relabels, inserted
/// nodes, and node pairs whose adjacency disagrees under the bijection that
/// sends dummy nodes to the unmatched targets.
pub fn direct_cost(pair: &GraphPair, m: &[usize]) -> u64 {
    let (g1, g2) = (&pair.g1, &pair.g2);
    let n2 = g2.node_count();
    let mut sigma: Vec<Option<usize>> = vec![None; n2];
    for (u, &v) in m.iter().enumerate() {
        sigma[v] = Some(u);
    }
    let relabels = m
        .iter()
        .enumerate()
        .filter(|&(u, &v)| g1.label(u) != g2.label(v))
        .count();
    let inserted = n2 - m.len();
    let mut edges = 0;
    for a in 0..n2 {
        for b in a + 1..n2 {
            let in1 = matches!((sigma[a], sigma[b]), (Some(x), Some(y)) if g1.has_edge(x, y));
            if in1 != g2.has_edge(a, b) {
                edges += 1;
            }
        }
    }
    (relabels + inserted + edges) as u64
}

/// `n2 x n2` permutation matrix of an injection, dummy rows sent to the
/// unmatched columns in ascending order.
pub fn padded_permutation(m: &[usize], n2: usize) -> Array2<f64> {
    let mut pi = Array2::zeros((n2, n2));
    let mut used = vec![false; n2];
    for (i, &j) in m.iter().enumerate() {
        pi[[i, j]] = 1.0;
        used[j] = true;
    }
    let free = (0..n2).filter(|&j| !used[j]);
    for (i, j) in (m.len()..n2).zip(free) {
        pi[[i, j]] = 1.0;
    }
    pi
}

/// All permutations of `0..n`, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    injections(n, n)
}

/// O(n^2) tau-b from concordant/discordant pair counts.
pub fn kendall_naive(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    let denom = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
    (denom > 0.0).then(|| (c - d) as f64 / denom)
}
