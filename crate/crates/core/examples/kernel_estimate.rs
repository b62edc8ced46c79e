//! Kernel estimate on a toy dataset, swept over bandwidths.
//!
//! ```bash
//! cargo run --release -p spikemi --example kernel_estimate
//! ```

use spikemi::estimators::{kernel_mi, KernelConfig};
use spikemi::metrics::{distance_matrix, MetricSpec};
use spikemi::toybench::{generate_toy, true_mi, Sigma2, ToySpec};

fn main() -> spikemi::Result<()> {
    let spec = ToySpec {
        n_s: 5,
        n_d: 3,
        n_t: 40,
        sigma2: Sigma2::Fixed(0.04),
        seed: 7,
    };
    let toy = generate_toy(&spec)?;
    let truth = true_mi(&toy.sources, toy.sigma2, 10_000, spec.seed)?;
    let dm = distance_matrix(&toy.data, &MetricSpec::Euclidean)?;

    println!("true information {truth:.3} bits (max {:.3})", (spec.n_s as f64).log2());
    for n_h in [1, 5, 10, 20, 40, 80, 200] {
        let est = kernel_mi(&toy.data, &dm, &KernelConfig::with_count(n_h))?;
        println!("n_h = {n_h:>3}: {:.3} bits", est.bits);
    }
    Ok(())
}
