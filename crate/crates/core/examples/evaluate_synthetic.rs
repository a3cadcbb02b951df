//! End-to-end evaluation on synthetic data: edit random graphs, label the
//! pairs exactly, run the estimators and score them.

use gedot::dataset::DatasetLine;
use gedot::ensemble::{EstimatorConfig, Method};
use gedot::graph::Label;
use gedot::harness::{evaluate_results, run_compute, run_exact, RunOptions};
use gedot::synth::{random_graph, synth_pair, SynthSpec};
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let alphabet: Vec<Label> = ["C", "N", "O", "S"].into_iter().map(Label::new).collect();
    let mut data: Vec<DatasetLine> = Vec::new();
    for q in 0..5 {
        let base = random_graph(&mut rng, 7, 0.35, &alphabet);
        for _ in 0..20 {
            let mut spec = SynthSpec::new(rng.random_range(1..=5), rng.random());
            spec.alphabet = Some(alphabet.clone());
            let mut line = synth_pair(&base, &spec).unwrap();
            line.query_id = Some(format!("q{q}"));
            data.push(line);
        }
    }

    let opts = RunOptions {
        paths: true,
        timing: true,
        parallel: 0,
    };
    let (_, labeled) = run_exact(&data, 9, 10, &RunOptions::default());
    let cfg = EstimatorConfig::default();
    for method in [Method::Gedgw, Method::HandcraftedOt, Method::Ensemble] {
        let results = run_compute(&labeled, method, &cfg, &opts);
        let eval = evaluate_results(&labeled, &results).unwrap();
        println!("== {method}\n{}", eval.report);
    }
}
