//! Accuracy of the kernel and histogram estimators on toy data.
//!
//! ```bash
//! cargo run --release -p spikemi --example toy_benchmark -- [n_s n_d n_t datasets seed]
//! ```
//!
//! Defaults to 10 sources in 3 dimensions with 10 trials, 50 datasets.

use std::time::Instant;

use spikemi::toybench::{run_benchmark, BenchmarkConfig, Protocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse())
        .collect::<Result<_, _>>()?;
    let get = |k: usize, default: usize| args.get(k).copied().unwrap_or(default);
    let protocol = Protocol::new(get(0, 10), get(1, 3), get(2, 10), get(3, 50));
    let seed = get(4, 1) as u64;

    let start = Instant::now();
    let result = run_benchmark(&protocol, &BenchmarkConfig::default(), seed)?;
    let s = &result.summary;

    println!(
        "n_s={} n_d={} n_t={}: {} datasets from {} candidates in {:.1?}",
        protocol.n_s,
        protocol.n_d,
        protocol.n_t,
        s.produced,
        s.candidates,
        start.elapsed()
    );
    println!(
        "kernel    mean |err| {:.3} bits (raw {:.3})",
        s.mean_abs_err_kernel, s.mean_abs_err_kernel_raw
    );
    println!(
        "histogram mean |err| {:.3} bits (raw {:.3}) at width {}",
        s.mean_abs_err_histogram, s.mean_abs_err_histogram_raw, s.best_hist_width
    );
    for w in &s.hist_widths {
        println!("  width {:>4}: {:.3} (raw {:.3})", w.width, w.mean_abs_err, w.mean_abs_err_raw);
    }
    Ok(())
}
