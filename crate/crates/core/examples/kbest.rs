//! Path quality as a function of k: extract edit paths from a GW coupling on
//! a pair of random graphs while exploring more matchings.

use gedot::exact::exact_ged;
use gedot::graph::{canonicalize_pair, Label};
use gedot::gw::{gedgw_solve, GwConfig};
use gedot::kbest::{kbest_gep, KBestConfig};
use gedot::synth::random_graph;
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let alphabet: Vec<Label> = ["C", "N", "O"].into_iter().map(Label::new).collect();
    let pair = canonicalize_pair(
        random_graph(&mut rng, 7, 0.4, &alphabet),
        random_graph(&mut rng, 8, 0.4, &alphabet),
    );
    let pi = gedgw_solve(&pair, &GwConfig::default())
        .unwrap()
        .strip_dummies(pair.g1.node_count());

    for k in [1, 2, 5, 10, 50, 100] {
        let cfg = KBestConfig {
            k,
            enable_pruning: true,
        };
        let r = kbest_gep(&pair, &pi, &cfg).unwrap();
        println!(
            "k = {k:>3}: length {:>2}, {} matchings seen, {} splits",
            r.ged_estimate,
            r.discovered.len(),
            r.splits
        );
    }
    println!("exact: {}", exact_ged(&pair, 9, 1).unwrap().ged);
}
