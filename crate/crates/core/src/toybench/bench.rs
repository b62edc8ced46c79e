use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{generate_toy, true_mi, Sigma2, ToySpec};
use crate::bias::{bias_corrected, CurveOptions};
use crate::data::format_real;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, HistogramConfig, KernelConfig};
use crate::metrics::{distance_matrix, MetricSpec};
use crate::rng;

/// Histogram bin widths tried by the benchmark.
pub const DEFAULT_HIST_WIDTHS: [f64; 8] = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0];

const PRUNE_BINS: usize = 10;
const MAX_ATTEMPTS_PER_DATASET: usize = 1000;
/// Candidates screened per round while pruning. Fixed so that acceptance does
/// not depend on the thread count.
const SCREEN_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Protocol {
    pub n_s: usize,
    pub n_d: usize,
    pub n_t: usize,
    pub datasets: usize,
    /// Spread normalised true information evenly over ten bins.
    pub prune: bool,
    pub mc_samples: usize,
}

impl Protocol {
    pub fn new(n_s: usize, n_d: usize, n_t: usize, datasets: usize) -> Self {
        Protocol {
            n_s,
            n_d,
            n_t,
            datasets,
            prune: true,
            mc_samples: super::DEFAULT_MC_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkConfig {
    pub kernel: KernelConfig,
    pub hist_widths: Vec<f64>,
    pub hist_origin: f64,
    /// Subsample fractions and repeats for bias correction. Fractions keeping
    /// fewer than two trials are dropped per protocol.
    pub lambdas: Vec<f64>,
    pub repeats: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        let curve = CurveOptions::default();
        BenchmarkConfig {
            kernel: KernelConfig::default(),
            hist_widths: DEFAULT_HIST_WIDTHS.to_vec(),
            hist_origin: 0.0,
            lambdas: curve.lambdas,
            repeats: curve.repeats,
        }
    }
}

/// One benchmark dataset. `*_bits` are bias corrected, `*_raw_bits` are the
/// full-data estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRecord {
    pub seed: u64,
    pub sigma2: f64,
    pub true_bits: f64,
    pub kernel_bits: f64,
    pub kernel_raw_bits: f64,
    pub hist_bits: f64,
    pub hist_raw_bits: f64,
    pub hist_width: f64,
    /// `(corrected, raw)` histogram estimates, one per configured width.
    #[serde(skip)]
    pub hist_by_width: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthSummary {
    pub width: f64,
    pub mean_abs_err: f64,
    pub mean_abs_err_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkSummary {
    pub protocol: Protocol,
    pub seed: u64,
    pub requested: usize,
    pub produced: usize,
    /// Candidate datasets drawn while filling the pruning bins.
    pub candidates: usize,
    pub mean_abs_err_kernel: f64,
    pub mean_abs_err_kernel_raw: f64,
    pub mean_abs_err_histogram: f64,
    pub mean_abs_err_histogram_raw: f64,
    pub best_hist_width: f64,
    pub hist_widths: Vec<WidthSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub records: Vec<DatasetRecord>,
    pub summary: BenchmarkSummary,
}

struct Candidate {
    seed: u64,
    sigma2: f64,
    true_bits: f64,
}

fn toy_spec(p: &Protocol, seed: u64) -> ToySpec {
    ToySpec {
        n_s: p.n_s,
        n_d: p.n_d,
        n_t: p.n_t,
        sigma2: Sigma2::Uniform,
        seed,
    }
}

fn screen(p: &Protocol, seed: u64) -> Result<Candidate> {
    let spec = toy_spec(p, seed);
    let sigma2 = spec.resolve_sigma2();
    let true_bits = if sigma2 < super::NOISELESS_SIGMA2 {
        (p.n_s as f64).log2()
    } else {
        true_mi(&spec.sources(), sigma2, p.mc_samples, seed)?
    };
    Ok(Candidate {
        seed,
        sigma2,
        true_bits,
    })
}

/// Bin quotas: `datasets / 10` each, the remainder going to the lowest bins.
fn quotas(datasets: usize) -> Vec<usize> {
    (0..PRUNE_BINS)
        .map(|b| datasets / PRUNE_BINS + usize::from(b < datasets % PRUNE_BINS))
        .collect()
}

fn normalized_bin(bits: f64, n_s: usize) -> usize {
    let x = bits / (n_s as f64).log2();
    ((x * PRUNE_BINS as f64).floor().max(0.0) as usize).min(PRUNE_BINS - 1)
}

/// Choose benchmark datasets, in candidate order.
fn select_candidates(p: &Protocol, seed: u64) -> Result<(Vec<Candidate>, usize)> {
    let cand_seed = |k: usize| rng::derive_seed(seed, &[k as u64]);
    if !p.prune {
        let chosen = (0..p.datasets)
            .into_par_iter()
            .map(|k| screen(p, cand_seed(k)))
            .collect::<Result<Vec<_>>>()?;
        return Ok((chosen, p.datasets));
    }

    let mut left = quotas(p.datasets);
    let cap = MAX_ATTEMPTS_PER_DATASET * p.datasets;
    let mut chosen = Vec::with_capacity(p.datasets);
    let mut drawn = 0;
    while chosen.len() < p.datasets && drawn < cap {
        let end = (drawn + SCREEN_BATCH).min(cap);
        let batch = (drawn..end)
            .into_par_iter()
            .map(|k| screen(p, cand_seed(k)))
            .collect::<Result<Vec<_>>>()?;
        for c in batch {
            drawn += 1;
            let b = normalized_bin(c.true_bits, p.n_s);
            if left[b] > 0 {
                left[b] -= 1;
                chosen.push(c);
                if chosen.len() == p.datasets {
                    break;
                }
            }
        }
    }
    Ok((chosen, drawn))
}

fn evaluate(p: &Protocol, cfg: &BenchmarkConfig, c: &Candidate) -> Result<DatasetRecord> {
    let toy = generate_toy(&toy_spec(p, c.seed))?;
    let d = &toy.data;
    let curve = CurveOptions {
        lambdas: cfg.lambdas.clone(),
        repeats: cfg.repeats,
        seed: rng::derive_seed(c.seed, &[rng::purpose::SUBSAMPLE]),
    }
    .usable_for(d.n_t(), 2);

    let dm = distance_matrix(d, &MetricSpec::Euclidean)?;
    let kernel = bias_corrected(d, Some(&dm), &Estimator::Kernel(cfg.kernel), &curve)?;

    let hist_by_width = cfg
        .hist_widths
        .iter()
        .map(|&width| {
            let est = Estimator::Histogram(HistogramConfig {
                width,
                origin: cfg.hist_origin,
            });
            bias_corrected(d, None, &est, &curve).map(|r| (r.corrected_bits(), r.raw.bits))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DatasetRecord {
        seed: c.seed,
        sigma2: c.sigma2,
        true_bits: c.true_bits,
        kernel_bits: kernel.corrected_bits(),
        kernel_raw_bits: kernel.raw.bits,
        hist_bits: f64::NAN,
        hist_raw_bits: f64::NAN,
        hist_width: f64::NAN,
        hist_by_width,
    })
}

fn mean_abs(errs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = errs.fold((0.0, 0usize), |(s, n), e| (s + e.abs(), n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Run the toy benchmark: choose datasets, compute ground truth, and compare
/// the bias-corrected kernel estimate with the best-width histogram estimate.
pub fn run_benchmark(p: &Protocol, cfg: &BenchmarkConfig, seed: u64) -> Result<BenchmarkResult> {
    toy_spec(p, 0).validate()?;
    if p.datasets == 0 {
        return Err(Error::invalid("dataset count must be >= 1"));
    }
    if cfg.hist_widths.is_empty() {
        return Err(Error::invalid("no histogram widths"));
    }

    let (chosen, candidates) = select_candidates(p, seed)?;
    let mut records = chosen
        .par_iter()
        .map(|c| evaluate(p, cfg, c))
        .collect::<Result<Vec<_>>>()?;

    let hist_widths: Vec<WidthSummary> = cfg
        .hist_widths
        .iter()
        .enumerate()
        .map(|(w, &width)| WidthSummary {
            width,
            mean_abs_err: mean_abs(records.iter().map(|r| r.hist_by_width[w].0 - r.true_bits)),
            mean_abs_err_raw: mean_abs(records.iter().map(|r| r.hist_by_width[w].1 - r.true_bits)),
        })
        .collect();
    let best = (0..hist_widths.len())
        .min_by(|&a, &b| hist_widths[a].mean_abs_err.total_cmp(&hist_widths[b].mean_abs_err))
        .unwrap_or(0);
    for r in &mut records {
        r.hist_bits = r.hist_by_width[best].0;
        r.hist_raw_bits = r.hist_by_width[best].1;
        r.hist_width = cfg.hist_widths[best];
    }

    let summary = BenchmarkSummary {
        protocol: *p,
        seed,
        requested: p.datasets,
        produced: records.len(),
        candidates,
        mean_abs_err_kernel: mean_abs(records.iter().map(|r| r.kernel_bits - r.true_bits)),
        mean_abs_err_kernel_raw: mean_abs(records.iter().map(|r| r.kernel_raw_bits - r.true_bits)),
        mean_abs_err_histogram: hist_widths[best].mean_abs_err,
        mean_abs_err_histogram_raw: hist_widths[best].mean_abs_err_raw,
        best_hist_width: cfg.hist_widths[best],
        hist_widths,
    };
    Ok(BenchmarkResult { records, summary })
}

/// Write `records.csv`, `summary.json`, `scatter.dat` (true vs kernel) and
/// `scatter_hist.dat` (true vs histogram) into `dir`. Scatter values are
/// normalised by `log2 n_s`.
pub fn write_outputs(result: &BenchmarkResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let norm = (result.summary.protocol.n_s as f64).log2();

    let mut csv = String::from("seed,sigma2,true_bits,kernel_bits,hist_bits,hist_width\n");
    let mut scatter = String::from("# true_norm kernel_norm\n");
    let mut scatter_hist = String::from("# true_norm hist_norm\n");
    for r in &result.records {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.seed,
            format_real(r.sigma2),
            format_real(r.true_bits),
            format_real(r.kernel_bits),
            format_real(r.hist_bits),
            format_real(r.hist_width)
        ));
        scatter.push_str(&format!(
            "{} {}\n",
            format_real(r.true_bits / norm),
            format_real(r.kernel_bits / norm)
        ));
        scatter_hist.push_str(&format!(
            "{} {}\n",
            format_real(r.true_bits / norm),
            format_real(r.hist_bits / norm)
        ));
    }
    let summary = serde_json::to_string_pretty(&result.summary)
        .map_err(|e| Error::invalid(e.to_string()))?;

    for (name, body) in [
        ("records.csv", csv),
        ("summary.json", summary + "\n"),
        ("scatter.dat", scatter),
        ("scatter_hist.dat", scatter_hist),
    ] {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(body.as_bytes()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotas_sum_to_total() {
        assert_eq!(quotas(50), vec![5; 10]);
        let q = quotas(23);
        assert_eq!(q.iter().sum::<usize>(), 23);
        assert_eq!(q[0], 3);
        assert_eq!(q[9], 2);
    }

    #[test]
    fn bins() {
        assert_eq!(normalized_bin(0.0, 4), 0);
        assert_eq!(normalized_bin(2.0, 4), 9);
        assert_eq!(normalized_bin(1.0, 4), 5);
        assert_eq!(normalized_bin(-0.1, 4), 0);
    }
}
