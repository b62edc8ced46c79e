//! Plug-in histogram estimates across bin widths.

use spikemi::estimators::{histogram_mi, HistogramConfig};
use spikemi::toybench::{generate_toy, true_mi, Sigma2, ToySpec};

fn main() -> spikemi::Result<()> {
    let spec = ToySpec {
        n_s: 10,
        n_d: 3,
        n_t: 10,
        sigma2: Sigma2::Fixed(0.05),
        seed: 11,
    };
    let toy = generate_toy(&spec)?;
    println!("true {:.3} bits", true_mi(&toy.sources, toy.sigma2, 10_000, 11)?);
    for width in [0.1, 0.25, 0.5, 1.0, 2.0, 5.0] {
        let est = histogram_mi(&toy.data, &HistogramConfig::new(width))?;
        println!("width {width:>4}: {:.3} bits", est.bits);
    }
    Ok(())
}
