use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gedot::dataset::{load_dataset, write_dataset, DatasetLine};
use gedot::ensemble::{EstimatorConfig, Method};
use gedot::exact::DEFAULT_MAX_NODES;
use gedot::graph::Label;
use gedot::gw::GwConfig;
use gedot::harness::{
    evaluate_results, format_results, parse_results, run_compute, run_exact, run_lower_bound,
    RunOptions,
};
use gedot::kbest::KBestConfig;
use gedot::ot::SinkhornConfig;
use gedot::synth::{random_graph, synth_pair, SynthSpec};

/// Approximate graph edit distance and edit paths via optimal transport.
#[derive(Parser)]
#[command(name = "gedot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate GED (and paths) for every pair of a dataset.
    Compute {
        #[arg(long)]
        dataset: PathBuf,
        /// gedgw, handcrafted-ot or ensemble.
        #[arg(long, default_value = "ensemble")]
        method: Method,
        #[command(flatten)]
        shared: Shared,
    },
    /// Exact GED by exhaustive search (small graphs only).
    Exact {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
        /// Write the dataset with exact `ged` and optimal `mappings` here.
        #[arg(long)]
        label: Option<PathBuf>,
        /// Optimal mappings kept per pair when labeling.
        #[arg(long, default_value_t = 10)]
        matching_cap: usize,
        #[command(flatten)]
        shared: Shared,
    },
    /// Score a results file against the dataset's ground truth.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        results: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a dataset of random graphs and edited copies.
    Synth {
        /// Number of base graphs; each yields `per-query` pairs.
        #[arg(long, default_value_t = 10)]
        queries: usize,
        #[arg(long, default_value_t = 10)]
        per_query: usize,
        #[arg(long, default_value_t = 4)]
        min_nodes: usize,
        #[arg(long, default_value_t = 7)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 1)]
        min_delta: usize,
        #[arg(long, default_value_t = 4)]
        max_delta: usize,
        /// Comma-separated node labels.
        #[arg(long, default_value = "C,N,O")]
        labels: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Label-multiset lower bound for every pair.
    Lb {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Shared {
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    sinkhorn_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    sinkhorn_tol: f64,
    #[arg(long, default_value_t = 1000)]
    cg_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    cg_tol: f64,
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Disable lower-bound pruning in k-best search.
    #[arg(long)]
    no_pruning: bool,
    /// Include edit paths and mappings in the results.
    #[arg(long)]
    paths: bool,
    /// Include per-pair wall time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    /// Accepted for a uniform flag set; none of the solvers draw random numbers.
    #[arg(long, default_value_t = 0)]
    #[allow(dead_code)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Shared {
    fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            sinkhorn: SinkhornConfig {
                epsilon: self.epsilon,
                max_iter: self.sinkhorn_iters,
                tol: self.sinkhorn_tol,
                log_domain: false,
            },
            gw: GwConfig {
                max_iter: self.cg_iters,
                tol: self.cg_tol,
                ..GwConfig::default()
            },
            kbest: KBestConfig {
                k: self.k,
                enable_pruning: !self.no_pruning,
            },
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            paths: self.paths,
            timing: self.timing,
            parallel: self.parallel,
        }
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match output {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn load(path: &PathBuf) -> Result<Vec<DatasetLine>, String> {
    load_dataset(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Returns whether every pair succeeded.
fn run(cli: Cli) -> Result<bool, String> {
    let io_err = |e: io::Error| e.to_string();
    match cli.command {
        Command::Compute {
            dataset,
            method,
            shared,
        } => {
            let data = load(&dataset)?;
            let results = run_compute(&data, method, &shared.estimator(), &shared.run_options());
            emit(shared.output.as_ref(), &format_results(&results)).map_err(io_err)?;
            report_failures(&results)
        }
        Command::Exact {
            dataset,
            max_nodes,
            label,
            matching_cap,
            shared,
        } => {
            let data = load(&dataset)?;
            let (results, labeled) =
                run_exact(&data, max_nodes, matching_cap, &shared.run_options());
            emit(shared.output.as_ref(), &format_results(&results)).map_err(io_err)?;
            if let Some(path) = label {
                let file = fs::File::create(&path).map_err(io_err)?;
                write_dataset(io::BufWriter::new(file), &labeled).map_err(io_err)?;
            }
            report_failures(&results)
        }
        Command::Eval {
            dataset,
            results,
            json,
            output,
        } => {
            let data = load(&dataset)?;
            let text =
                fs::read_to_string(&results).map_err(|e| format!("{}: {e}", results.display()))?;
            let parsed = parse_results(&text).map_err(|e| format!("{}: {e}", results.display()))?;
            let eval = evaluate_results(&data, &parsed).map_err(|e| e.to_string())?;
            if eval.skipped > 0 {
                eprintln!(
                    "skipped {} results without an estimate or ground truth",
                    eval.skipped
                );
            }
            if let Some(path) = json {
                let body = serde_json::to_string_pretty(&eval.report).map_err(|e| e.to_string())?;
                fs::write(path, body + "\n").map_err(io_err)?;
            }
            emit(output.as_ref(), &eval.report.to_string()).map_err(io_err)?;
            Ok(true)
        }
        Command::Synth {
            queries,
            per_query,
            min_nodes,
            max_nodes,
            edge_prob,
            min_delta,
            max_delta,
            labels,
            seed,
            output,
        } => {
            if min_nodes > max_nodes || min_delta == 0 || min_delta > max_delta {
                return Err("need min-nodes <= max-nodes and 1 <= min-delta <= max-delta".into());
            }
            let alphabet: Vec<Label> = labels.split(',').map(|s| Label::new(s.trim())).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut lines = Vec::with_capacity(queries * per_query);
            for q in 0..queries {
                let n = rng.random_range(min_nodes..=max_nodes);
                let base = random_graph(&mut rng, n, edge_prob, &alphabet);
                for _ in 0..per_query {
                    let mut spec =
                        SynthSpec::new(rng.random_range(min_delta..=max_delta), rng.random());
                    spec.alphabet = Some(alphabet.clone());
                    let mut line = synth_pair(&base, &spec).map_err(|e| e.to_string())?;
                    line.query_id = Some(format!("q{q}"));
                    lines.push(line);
                }
            }
            let mut buf = Vec::new();
            write_dataset(&mut buf, &lines).map_err(io_err)?;
            emit(
                output.as_ref(),
                &String::from_utf8(buf).expect("JSON is UTF-8"),
            )
            .map_err(io_err)?;
            Ok(true)
        }
        Command::Lb { dataset, output } => {
            let data = load(&dataset)?;
            emit(output.as_ref(), &run_lower_bound(&data)).map_err(io_err)?;
            Ok(true)
        }
    }
}

fn report_failures(results: &[gedot::harness::ResultLine]) -> Result<bool, String> {
    let failed: Vec<_> = results.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "pair {}: {}",
            r.pair_index,
            r.error.as_deref().unwrap_or_default()
        );
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
