//! Batch runners behind the command line: estimate, solve exactly or bound
//! every pair of a dataset in parallel, and score results against truth.
//!
//! Results are JSONL, one object per pair in dataset order. Floats are
//! written with six decimals so identical runs produce identical bytes;
//! timings are only included on request.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::dataset::DatasetLine;
use crate::ensemble::{estimate, EstimatorConfig, Method};
use crate::exact::exact_ged;
use crate::metrics::{canonical_ops, evaluate, EvalReport, MetricsError, PairRecord};
use crate::path::{ep_gen, ged_lower_bound, user_path, EditPath, NodeMatching};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub paths: bool,
    pub timing: bool,
    /// Worker threads; 0 lets the pool decide.
    pub parallel: usize,
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultLine {
    pub pair_index: usize,
    pub method: String,
    #[serde(default)]
    pub ged_estimate: Option<f64>,
    /// Transforms the dataset's `g1` into its `g2`.
    #[serde(default)]
    pub path: Option<EditPath>,
    /// Matching from the smaller graph that induced `path`.
    #[serde(default)]
    pub mapping: Option<NodeMatching>,
    #[serde(default)]
    pub truth_approximate: bool,
    #[serde(default)]
    pub elapsed_millis: Option<f64>,
    #[serde(default)]
    pub error: Option<String>,
}

impl ResultLine {
    fn failed(pair_index: usize, method: &str, error: String) -> Self {
        ResultLine {
            pair_index,
            method: method.to_string(),
            ged_estimate: None,
            path: None,
            mapping: None,
            truth_approximate: false,
            elapsed_millis: None,
            error: Some(error),
        }
    }

    /// Serializes with a fixed key order and fixed float precision.
    pub fn to_json(&self) -> String {
        let mut s = format!(
            "{{\"pair_index\":{},\"method\":{}",
            self.pair_index,
            serde_json::to_string(&self.method).expect("string serializes")
        );
        if let Some(v) = self.ged_estimate {
            write!(s, ",\"ged_estimate\":{v:.6}").unwrap();
        }
        if let Some(p) = &self.path {
            write!(
                s,
                ",\"path\":{}",
                serde_json::to_string(p).expect("path serializes")
            )
            .unwrap();
        }
        if let Some(m) = &self.mapping {
            write!(
                s,
                ",\"mapping\":{}",
                serde_json::to_string(m).expect("mapping serializes")
            )
            .unwrap();
        }
        if self.truth_approximate {
            s.push_str(",\"truth_approximate\":true");
        }
        if let Some(ms) = self.elapsed_millis {
            write!(s, ",\"elapsed_millis\":{ms:.6}").unwrap();
        }
        if let Some(e) = &self.error {
            write!(
                s,
                ",\"error\":{}",
                serde_json::to_string(e).expect("string serializes")
            )
            .unwrap();
        }
        s.push('}');
        s
    }
}

pub fn format_results(lines: &[ResultLine]) -> String {
    lines.iter().map(|l| l.to_json() + "\n").collect()
}

pub fn parse_results(text: &str) -> Result<Vec<ResultLine>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

fn in_pool<T: Send>(parallel: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .expect("thread pool starts")
        .install(f)
}

fn elapsed(start: Instant, on: bool) -> Option<f64> {
    on.then(|| start.elapsed().as_secs_f64() * 1000.0)
}

/// Runs `method` on every pair. Failures become lines with an `error` field.
pub fn run_compute(
    data: &[DatasetLine],
    method: Method,
    cfg: &EstimatorConfig,
    opts: &RunOptions,
) -> Vec<ResultLine> {
    in_pool(opts.parallel, || {
        data.par_iter()
            .enumerate()
            .map(|(i, line)| {
                let start = Instant::now();
                let pair = line.pair();
                match estimate(&pair, method, cfg) {
                    Ok(e) => {
                        let m = e.matching.expect("estimators return a matching");
                        ResultLine {
                            pair_index: i,
                            method: method.id().to_string(),
                            ged_estimate: Some(e.ged_value),
                            path: opts
                                .paths
                                .then(|| user_path(&pair, &m).expect("matching is valid")),
                            mapping: opts.paths.then_some(m),
                            truth_approximate: line.approximate,
                            elapsed_millis: elapsed(start, opts.timing),
                            error: None,
                        }
                    }
                    Err(err) => ResultLine::failed(i, method.id(), err.to_string()),
                }
            })
            .collect()
    })
}

/// Exact distances, with the first optimal matching when paths are requested.
/// Also returns the dataset relabeled with exact truth (up to `matching_cap`
/// optimal mappings) for pairs that were solved.
pub fn run_exact(
    data: &[DatasetLine],
    max_nodes: usize,
    matching_cap: usize,
    opts: &RunOptions,
) -> (Vec<ResultLine>, Vec<DatasetLine>) {
    let cap = matching_cap.max(1);
    in_pool(opts.parallel, || {
        data.par_iter()
            .enumerate()
            .map(|(i, line)| {
                let start = Instant::now();
                let pair = line.pair();
                match exact_ged(&pair, max_nodes, cap) {
                    Ok(r) => {
                        let m = r.optimal_matchings[0].clone();
                        let mut labeled = line.clone();
                        labeled.ged = Some(r.ged);
                        labeled.approximate = false;
                        labeled.mappings = Some(
                            r.optimal_matchings[..matching_cap.min(r.optimal_matchings.len())]
                                .to_vec(),
                        );
                        let result = ResultLine {
                            pair_index: i,
                            method: "exact".to_string(),
                            ged_estimate: Some(r.ged as f64),
                            path: opts
                                .paths
                                .then(|| user_path(&pair, &m).expect("matching is valid")),
                            mapping: opts.paths.then_some(m),
                            truth_approximate: false,
                            elapsed_millis: elapsed(start, opts.timing),
                            error: None,
                        };
                        (result, labeled)
                    }
                    Err(err) => (
                        ResultLine::failed(i, "exact", err.to_string()),
                        line.clone(),
                    ),
                }
            })
            .unzip()
    })
}

/// `{"pair_index": i, "lower_bound": b}` per pair.
pub fn run_lower_bound(data: &[DatasetLine]) -> String {
    data.iter()
        .enumerate()
        .map(|(i, line)| {
            format!(
                "{{\"pair_index\":{i},\"lower_bound\":{}}}\n",
                ged_lower_bound(&line.pair())
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    /// Results skipped for lacking an estimate, a truth or a valid index.
    pub skipped: usize,
}

/// Scores `results` against the truth recorded in `data`. Path metrics use
/// results that carry a mapping and pairs that carry truth mappings.
pub fn evaluate_results(
    data: &[DatasetLine],
    results: &[ResultLine],
) -> Result<Evaluation, MetricsError> {
    let mut records = Vec::new();
    let mut skipped = 0;
    for r in results {
        let (Some(line), Some(pred)) = (data.get(r.pair_index), r.ged_estimate) else {
            skipped += 1;
            continue;
        };
        let Some(truth) = line.ged else {
            skipped += 1;
            continue;
        };
        let pair = line.pair();
        let ops_of = |m: &NodeMatching| ep_gen(&pair, m).ok().map(|p| canonical_ops(&pair, m, &p));
        records.push(PairRecord {
            pair_index: r.pair_index,
            query_id: line.query_id.clone(),
            prediction: pred,
            truth,
            predicted_ops: r.mapping.as_ref().and_then(ops_of),
            truth_ops: line
                .mappings
                .as_ref()
                .map(|ms| ms.iter().filter_map(ops_of).collect()),
            elapsed_millis: r.elapsed_millis,
        });
    }
    Ok(Evaluation {
        report: evaluate(&records)?,
        skipped,
    })
}
