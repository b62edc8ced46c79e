//! Subsample curve and quadratic extrapolation in 1/n_t.

use spikemi::bias::{bias_corrected, CurveOptions};
use spikemi::estimators::{Estimator, HistogramConfig, KernelConfig};
use spikemi::metrics::{distance_matrix, MetricSpec};
use spikemi::toybench::{generate_toy, true_mi, Sigma2, ToySpec};

fn main() -> spikemi::Result<()> {
    let spec = ToySpec {
        n_s: 8,
        n_d: 3,
        n_t: 30,
        sigma2: Sigma2::Fixed(0.08),
        seed: 5,
    };
    let toy = generate_toy(&spec)?;
    let dm = distance_matrix(&toy.data, &MetricSpec::Euclidean)?;
    println!("true {:.3} bits", true_mi(&toy.sources, toy.sigma2, 10_000, 5)?);

    let opts = CurveOptions::default();
    for est in [
        Estimator::Kernel(KernelConfig::default()),
        Estimator::Histogram(HistogramConfig::new(0.5)),
    ] {
        let r = bias_corrected(&toy.data, Some(&dm), &est, &opts)?;
        println!("{:?}", est.kind());
        for p in &r.curve {
            println!("  n_t = {:>2}: {:.3}", p.n_t, p.bits);
        }
        println!(
            "  raw {:.3}, corrected {:.3} (A = {:.3}, B = {:.3})",
            r.raw.bits, r.fit.intercept_bits, r.fit.a_bits, r.fit.b_bits
        );
    }
    Ok(())
}
