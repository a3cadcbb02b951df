//! The three estimators side by side, and how the handcrafted coupling splits
//! mass between two symmetric targets.

use gedot::ensemble::{estimate, handcrafted_cost, EstimatorConfig, Method};
use gedot::exact::exact_ged;
use gedot::graph::{canonicalize_pair, Graph, Label};

fn main() {
    let labels = |ls: &[&str]| ls.iter().map(|&s| Label::new(s)).collect();
    // g1 = A-B, g2 = A-B-A: node A may map to either end.
    let pair = canonicalize_pair(
        Graph::new(labels(&["A", "B"]), &[(0, 1)]).unwrap(),
        Graph::new(labels(&["A", "B", "A"]), &[(0, 1), (1, 2)]).unwrap(),
    );
    println!("cost matrix:\n{}", handcrafted_cost(&pair));

    let mut cfg = EstimatorConfig::default();
    cfg.sinkhorn = cfg.sinkhorn.with_epsilon(0.01).stabilized();
    cfg.sinkhorn.max_iter = 10_000;
    for method in [Method::Gedgw, Method::HandcraftedOt, Method::Ensemble] {
        let e = estimate(&pair, method, &cfg).unwrap();
        println!(
            "{method:>14}: value {:.3}, path length {}",
            e.ged_value,
            e.path_len().unwrap()
        );
        if let Some(pi) = e.coupling.filter(|_| method == Method::HandcraftedOt) {
            println!("coupling:\n{pi:.3}");
        }
    }
    println!("exact: {}", exact_ged(&pair, 9, 1).unwrap().ged);
}
