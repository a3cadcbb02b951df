//! Evaluation metrics over batches of predictions: value error, rounding
//! accuracy, feasibility, per-query ranking quality and edit-path overlap.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphPair, Label};
use crate::path::{EditOp, EditPath, NodeMatching};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no records to evaluate")]
    Empty,
}

/// An edit operation expressed in `g2`'s node ids so that paths from
/// different matchings can be compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CanonicalOp {
    Relabel { node: usize, label: Label },
    InsertNode { label: Label },
    DeleteEdge { u: usize, v: usize },
    InsertEdge { u: usize, v: usize },
}

/// Re-expresses a path produced by `ep_gen(pair, m)` in `g2`'s frame. Matched
/// nodes map to their image and inserted nodes to the unmatched `g2` node
/// they become.
pub fn canonical_ops(pair: &GraphPair, m: &NodeMatching, path: &EditPath) -> Vec<CanonicalOp> {
    let n1 = pair.g1.node_count();
    let map = m.as_slice();
    let unmatched = m.unmatched(pair.g2.node_count());
    let frame = |x: usize| if x < n1 { map[x] } else { unmatched[x - n1] };
    let edge = |a: usize, b: usize| {
        let (a, b) = (frame(a), frame(b));
        (a.min(b), a.max(b))
    };
    let mut ops: Vec<CanonicalOp> = path
        .ops
        .iter()
        .map(|op| match op {
            EditOp::Relabel { node, label } => CanonicalOp::Relabel {
                node: frame(*node),
                label: label.clone(),
            },
            EditOp::InsertNode { label } => CanonicalOp::InsertNode {
                label: label.clone(),
            },
            EditOp::DeleteEdge { u, v } => {
                let (u, v) = edge(*u, *v);
                CanonicalOp::DeleteEdge { u, v }
            }
            EditOp::InsertEdge { u, v } => {
                let (u, v) = edge(*u, *v);
                CanonicalOp::InsertEdge { u, v }
            }
            EditOp::DeleteNode { .. } => unreachable!("canonical paths never delete nodes"),
        })
        .collect();
    ops.sort();
    ops
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairRecord {
    pub pair_index: usize,
    /// Records sharing a query are ranked against each other.
    pub query_id: Option<String>,
    pub prediction: f64,
    pub truth: u64,
    pub predicted_ops: Option<Vec<CanonicalOp>>,
    /// One op multiset per known optimal path.
    pub truth_ops: Option<Vec<Vec<CanonicalOp>>>,
    pub elapsed_millis: Option<f64>,
}

fn nonempty(records: &[PairRecord]) -> Result<(), MetricsError> {
    if records.is_empty() {
        Err(MetricsError::Empty)
    } else {
        Ok(())
    }
}

pub fn mae(records: &[PairRecord]) -> Result<f64, MetricsError> {
    nonempty(records)?;
    let total: f64 = records
        .iter()
        .map(|r| (r.truth as f64 - r.prediction).abs())
        .sum();
    Ok(total / records.len() as f64)
}

/// Rounds halves up: 2.5 becomes 3, -0.5 becomes 0.
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

pub fn accuracy(records: &[PairRecord]) -> Result<f64, MetricsError> {
    nonempty(records)?;
    let hits = records
        .iter()
        .filter(|r| round_half_up(r.prediction) == r.truth as f64)
        .count();
    Ok(hits as f64 / records.len() as f64)
}

/// Fraction of predictions that do not undercut the truth.
pub fn feasibility(records: &[PairRecord]) -> Result<f64, MetricsError> {
    nonempty(records)?;
    let ok = records
        .iter()
        .filter(|r| r.prediction >= r.truth as f64 - 1e-9)
        .count();
    Ok(ok as f64 / records.len() as f64)
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho; `None` when either side is constant or too short.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

fn tied_pairs<T, F: Fn(&T, &T) -> bool>(sorted: &[T], same: F) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Merge sort on `ys` returning the number of inversions.
fn count_inversions(ys: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = ys.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut ys[..mid], &mut buf[..mid]);
    swaps += count_inversions(&mut ys[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if ys[j] < ys[i] {
            buf[k] = ys[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = ys[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&ys[i..mid]);
    let k = k + mid - i;
    buf[k..].copy_from_slice(&ys[j..]);
    ys.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b in O(n log n); `None` when either side is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as u64;
    if n < 2 {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n0 = n * (n - 1) / 2;
    let tx = tied_pairs(&pts, |a, b| a.0 == b.0);
    let txy = tied_pairs(&pts, |a, b| a == b);
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = count_inversions(&mut ys, &mut buf);
    let ty = tied_pairs(&ys, |a, b| a == b);
    let denom = ((n0 - tx) as f64 * (n0 - ty) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    let num = n0 as f64 - tx as f64 - ty as f64 + txy as f64 - 2.0 * swaps as f64;
    Some((num / denom).clamp(-1.0, 1.0))
}

/// Overlap between the `k` smallest predictions and the `k` smallest truths,
/// where every item tied with the `k`-th truth value counts as a truth top-k
/// member. `None` when fewer than `k` items exist.
pub fn precision_at_k(pred: &[f64], truth: &[u64], k: usize) -> Option<f64> {
    assert_eq!(pred.len(), truth.len());
    if k == 0 || pred.len() < k {
        return None;
    }
    let mut by_pred: Vec<usize> = (0..pred.len()).collect();
    by_pred.sort_by(|&a, &b| pred[a].total_cmp(&pred[b]).then(a.cmp(&b)));
    let mut sorted_truth = truth.to_vec();
    sorted_truth.sort_unstable();
    let cutoff = sorted_truth[k - 1];
    let hits = by_pred[..k].iter().filter(|&&i| truth[i] <= cutoff).count();
    Some(hits as f64 / k as f64)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankSummary {
    pub spearman_rho: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub p_at_10: Option<f64>,
    pub p_at_20: Option<f64>,
    pub groups: usize,
    /// Groups where a correlation was undefined (constant side).
    pub undefined_correlations: usize,
    pub p10_skipped: usize,
    pub p20_skipped: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Ranking metrics per query group, averaged over groups. Records without a
/// query id form one group.
pub fn rank_metrics(records: &[PairRecord]) -> RankSummary {
    let mut groups: BTreeMap<Option<&str>, Vec<&PairRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.query_id.as_deref()).or_default().push(r);
    }
    let (mut rhos, mut taus, mut p10s, mut p20s) = (vec![], vec![], vec![], vec![]);
    let mut out = RankSummary {
        groups: groups.len(),
        ..RankSummary::default()
    };
    for group in groups.values() {
        let pred: Vec<f64> = group.iter().map(|r| r.prediction).collect();
        let truth: Vec<u64> = group.iter().map(|r| r.truth).collect();
        let truth_f: Vec<f64> = truth.iter().map(|&t| t as f64).collect();
        match (spearman(&pred, &truth_f), kendall_tau_b(&pred, &truth_f)) {
            (Some(r), Some(t)) => {
                rhos.push(r);
                taus.push(t);
            }
            _ => out.undefined_correlations += 1,
        }
        match precision_at_k(&pred, &truth, 10) {
            Some(p) => p10s.push(p),
            None => out.p10_skipped += 1,
        }
        match precision_at_k(&pred, &truth, 20) {
            Some(p) => p20s.push(p),
            None => out.p20_skipped += 1,
        }
    }
    out.spearman_rho = mean(&rhos);
    out.kendall_tau = mean(&taus);
    out.p_at_10 = mean(&p10s);
    out.p_at_20 = mean(&p20s);
    out
}

/// Size of the multiset intersection of two sorted op lists.
fn common(a: &[CanonicalOp], b: &[CanonicalOp]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `(recall, precision, f1)` of a predicted op multiset against one truth.
/// An empty side scores 1 on the ratio it would divide.
pub fn path_scores(pred: &[CanonicalOp], truth: &[CanonicalOp]) -> (f64, f64, f64) {
    let mut pred = pred.to_vec();
    let mut truth = truth.to_vec();
    pred.sort();
    truth.sort();
    let hit = common(&pred, &truth) as f64;
    let recall = if truth.is_empty() {
        1.0
    } else {
        hit / truth.len() as f64
    };
    let precision = if pred.is_empty() {
        1.0
    } else {
        hit / pred.len() as f64
    };
    let f1 = if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    };
    (recall, precision, f1)
}

/// Mean path scores over records that carry both a prediction and at least
/// one truth path. Against several truths the best-F1 one is used.
pub fn path_metrics(records: &[PairRecord]) -> Option<(f64, f64, f64)> {
    let mut sums = (0.0, 0.0, 0.0);
    let mut count = 0usize;
    for r in records {
        let (Some(pred), Some(truths)) = (&r.predicted_ops, &r.truth_ops) else {
            continue;
        };
        let best =
            truths
                .iter()
                .map(|t| path_scores(pred, t))
                .reduce(|a, b| if b.2 > a.2 { b } else { a });
        if let Some((rc, pr, f1)) = best {
            sums.0 += rc;
            sums.1 += pr;
            sums.2 += f1;
            count += 1;
        }
    }
    (count > 0).then(|| {
        let c = count as f64;
        (sums.0 / c, sums.1 / c, sums.2 / c)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub mae: f64,
    pub accuracy: f64,
    pub feasibility: f64,
    pub spearman_rho: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub p_at_10: Option<f64>,
    pub p_at_20: Option<f64>,
    pub path_recall: Option<f64>,
    pub path_precision: Option<f64>,
    pub path_f1: Option<f64>,
    pub seconds_per_100_pairs: Option<f64>,
    pub query_groups: usize,
    pub p10_skipped_groups: usize,
    pub p20_skipped_groups: usize,
}

pub fn evaluate(records: &[PairRecord]) -> Result<EvalReport, MetricsError> {
    let ranks = rank_metrics(records);
    let paths = path_metrics(records);
    let timed: Vec<f64> = records.iter().filter_map(|r| r.elapsed_millis).collect();
    Ok(EvalReport {
        pairs: records.len(),
        mae: mae(records)?,
        accuracy: accuracy(records)?,
        feasibility: feasibility(records)?,
        spearman_rho: ranks.spearman_rho,
        kendall_tau: ranks.kendall_tau,
        p_at_10: ranks.p_at_10,
        p_at_20: ranks.p_at_20,
        path_recall: paths.map(|p| p.0),
        path_precision: paths.map(|p| p.1),
        path_f1: paths.map(|p| p.2),
        seconds_per_100_pairs: mean(&timed).map(|ms| ms / 10.0),
        query_groups: ranks.groups,
        p10_skipped_groups: ranks.p10_skipped,
        p20_skipped_groups: ranks.p20_skipped,
    })
}

impl fmt::Display for EvalReport {
    /// Two aligned columns, one metric per row; undefined values print `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        let rows = [
            ("pairs", self.pairs.to_string()),
            ("mae", format!("{:.6}", self.mae)),
            ("accuracy", format!("{:.6}", self.accuracy)),
            ("feasibility", format!("{:.6}", self.feasibility)),
            ("spearman_rho", opt(self.spearman_rho)),
            ("kendall_tau", opt(self.kendall_tau)),
            ("p_at_10", opt(self.p_at_10)),
            ("p_at_20", opt(self.p_at_20)),
            ("path_recall", opt(self.path_recall)),
            ("path_precision", opt(self.path_precision)),
            ("path_f1", opt(self.path_f1)),
            ("seconds_per_100_pairs", opt(self.seconds_per_100_pairs)),
            ("query_groups", self.query_groups.to_string()),
            ("p10_skipped_groups", self.p10_skipped_groups.to_string()),
            ("p20_skipped_groups", self.p20_skipped_groups.to_string()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            writeln!(out, "{k:<width$}  {v:>12}")?;
        }
        f.write_str(&out)
    }
}
