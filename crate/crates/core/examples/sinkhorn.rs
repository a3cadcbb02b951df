//! Entropic transport on a small cost matrix, the log-domain solver at a tiny
//! epsilon, and the extended solver for unequal sides.

use gedot::ot::{extended_sinkhorn, lsap_min, sinkhorn, SinkhornConfig};
use ndarray::array;

fn main() {
    let c = array![[0.1, 0.9, 0.5], [0.7, 0.2, 0.6], [0.4, 0.8, 0.3]];
    let ones = [1.0; 3];

    let soft = sinkhorn(&c, &ones, &ones, &SinkhornConfig::default()).unwrap();
    println!(
        "epsilon 0.05, {} iterations:\n{:.3}",
        soft.iterations_used, soft.coupling
    );

    let cfg = SinkhornConfig::default().with_epsilon(1e-3).stabilized();
    let sharp = sinkhorn(&c, &ones, &ones, &cfg).unwrap();
    let (m, best) = lsap_min(&c, &[], &[]).unwrap();
    println!(
        "epsilon 1e-3: cost {:.4}, assignment {:?} costs {best:.4}",
        sharp.transport_cost,
        m.as_slice()
    );

    // Two rows into three columns: every row is fully matched, one column
    // keeps spare capacity.
    let rect = array![[0.0, 1.0, 1.0], [1.0, 1.0, 0.0]];
    let ext = extended_sinkhorn(&rect, &SinkhornConfig::default()).unwrap();
    println!("extended:\n{:.3}", ext.coupling);
}
