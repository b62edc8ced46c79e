//! The digamma nearest-neighbour estimator next to the kernel estimator.

use spikemi::estimators::{kernel_mi, ksg_mi, KernelConfig, KsgConfig};
use spikemi::metrics::{distance_matrix, MetricSpec};
use spikemi::toybench::{generate_toy, true_mi, Sigma2, ToySpec};

fn main() -> spikemi::Result<()> {
    println!("sigma2   true  kernel   ksg(1)  ksg(10)");
    for sigma2 in [0.002, 0.02, 0.1, 0.3, 1.0] {
        let spec = ToySpec {
            n_s: 4,
            n_d: 2,
            n_t: 50,
            sigma2: Sigma2::Fixed(sigma2),
            seed: 3,
        };
        let toy = generate_toy(&spec)?;
        let dm = distance_matrix(&toy.data, &MetricSpec::Euclidean)?;
        let truth = true_mi(&toy.sources, sigma2, 10_000, 3)?;
        let kernel = kernel_mi(&toy.data, &dm, &KernelConfig::default())?.bits;
        let ksg1 = ksg_mi(&toy.data, &dm, &KsgConfig::new(1))?.bits;
        let ksg10 = ksg_mi(&toy.data, &dm, &KsgConfig::new(10))?.bits;
        println!("{sigma2:<6} {truth:6.3} {kernel:7.3} {ksg1:8.3} {ksg10:8.3}");
    }
    Ok(())
}
