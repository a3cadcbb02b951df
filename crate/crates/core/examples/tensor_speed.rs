//! Applying the edge-disagreement tensor: direct quadruple sum against the
//! factored matrix form.

use std::time::Instant;

use gedot::graph::{canonicalize_pair, Label};
use gedot::gw::{tensor_apply, GwProblem, TensorMode};
use gedot::synth::random_graph;
use ndarray::Array2;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let alphabet = [Label::new("x")];
    for n in [10, 20, 40, 60] {
        let pair = canonicalize_pair(
            random_graph(&mut rng, n, 0.2, &alphabet),
            random_graph(&mut rng, n, 0.2, &alphabet),
        );
        let prob = GwProblem::from_pair(&pair);
        let b = Array2::from_shape_fn((n, n), |_| rng.random::<f64>());
        let time = |mode| {
            let start = Instant::now();
            let out = tensor_apply(&prob.a1, &prob.a2, &b, mode).unwrap();
            (start.elapsed(), out)
        };
        let (tn, naive) = time(TensorMode::Naive);
        let (tf, fast) = time(TensorMode::Fast);
        let diff = naive
            .iter()
            .zip(&fast)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("n = {n:>2}: naive {tn:>10.2?}, fast {tf:>9.2?}, max diff {diff:.1e}");
    }
}
