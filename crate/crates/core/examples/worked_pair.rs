//! A three-node and a four-node labeled graph: exact distance, the edit path
//! of one optimal matching, the label bound, and the GW estimate.

use gedot::ensemble::{estimate, EstimatorConfig, Method};
use gedot::exact::exact_ged;
use gedot::graph::{canonicalize_pair, Graph, Label};
use gedot::path::{ep_gen, ged_lower_bound, verify_path};

fn main() {
    let labels = |ls: &[&str]| ls.iter().map(|&s| Label::new(s)).collect();
    let g1 = Graph::new(labels(&["A", "B", "C"]), &[(0, 1), (1, 2)]).unwrap();
    let g2 = Graph::new(labels(&["A", "B", "D", "E"]), &[(0, 1), (2, 3)]).unwrap();
    let pair = canonicalize_pair(g1, g2);

    let exact = exact_ged(&pair, 9, 5).unwrap();
    println!(
        "exact GED {} over {} matchings",
        exact.ged, exact.enumerated_count
    );
    let m = &exact.optimal_matchings[0];
    let path = ep_gen(&pair, m).unwrap();
    println!("matching {:?}:", m.as_slice());
    for op in &path.ops {
        println!("  {op}");
    }
    assert!(verify_path(&pair, &path, m));
    println!("lower bound {}", ged_lower_bound(&pair));

    let gw = estimate(&pair, Method::Gedgw, &EstimatorConfig::default()).unwrap();
    println!(
        "gedgw value {:.3}, path length {}",
        gw.ged_value,
        gw.path_len().unwrap()
    );
}
