use std::collections::BTreeMap;

use serde::Serialize;

use super::{ConfigEcho, EstimatorKind, MiEstimate};
use crate::data::{LabeledDataset, ResponsePoint};
use crate::error::{Error, Result};

/// Cubic bins of side `width`, boundaries at `origin + k * width` in every dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramConfig {
    pub width: f64,
    pub origin: f64,
}

impl HistogramConfig {
    pub fn new(width: f64) -> Self {
        HistogramConfig { width, origin: 0.0 }
    }
}

/// Plug-in estimate over the joint (bin, stimulus) counts, in bits.
pub fn histogram_mi(d: &LabeledDataset, cfg: &HistogramConfig) -> Result<MiEstimate> {
    if !(cfg.width.is_finite() && cfg.width > 0.0) {
        return Err(Error::invalid(format!("bin width {} must be finite and > 0", cfg.width)));
    }
    if !cfg.origin.is_finite() {
        return Err(Error::invalid(format!("bin origin {} must be finite", cfg.origin)));
    }
    let n_s = d.n_s();
    // bin -> per-stimulus counts; ordered so the sum is reproducible
    let mut joint: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (p, l) in d.points().iter().zip(d.labels()) {
        let x = match p {
            ResponsePoint::Vector(x) => x,
            ResponsePoint::SpikeTrain(_) => {
                return Err(Error::MetricMismatch {
                    metric: "histogram",
                    variant: "spike-train",
                })
            }
        };
        let key = x
            .iter()
            .map(|&v| ((v - cfg.origin) / cfg.width).floor() as i64)
            .collect();
        joint.entry(key).or_insert_with(|| vec![0; n_s])[l.0] += 1;
    }

    let n = d.n_r();
    let n_t = d.n_t();
    let mut bits = 0.0;
    for counts in joint.values() {
        let n_bin: usize = counts.iter().sum();
        for &n_bs in counts.iter().filter(|&&c| c > 0) {
            let ratio = (n_bs * n) as f64 / (n_bin * n_t) as f64;
            bits += (n_bs as f64 / n as f64) * ratio.log2();
        }
    }
    let bits = bits.clamp(0.0, (n_s as f64).log2());

    Ok(MiEstimate {
        estimator: EstimatorKind::Histogram,
        config: ConfigEcho::Histogram(*cfg),
        bits,
    })
}
