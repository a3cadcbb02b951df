//! Exact GED with all optimal matchings for a small pair, and the size guard.

use gedot::exact::{exact_ged, ExactError};
use gedot::graph::{canonicalize_pair, Graph};

fn main() {
    // A 4-cycle against a 5-node path.
    let cycle = Graph::unlabeled(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let path = Graph::unlabeled(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let pair = canonicalize_pair(cycle, path);
    let r = exact_ged(&pair, 9, 20).unwrap();
    println!(
        "GED {} ({} injections evaluated)",
        r.ged, r.enumerated_count
    );
    for m in &r.optimal_matchings {
        println!("  {:?}", m.as_slice());
    }

    let big = Graph::unlabeled(12, &[]).unwrap();
    match exact_ged(&canonicalize_pair(big.clone(), big), 9, 1) {
        Err(e @ ExactError::TooLarge { .. }) => println!("refused: {e}"),
        other => println!("unexpected: {other:?}"),
    }
}
