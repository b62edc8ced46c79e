//! Square-kernel estimator with a volume bandwidth.
//!
//! The kernel around response `i` is the set of its `n_h` nearest responses
//! (itself included). Volumes are measured by the response distribution
//! itself, so the kernel density of `(r_i, s_i)` reduces to `c / n_h`, with
//! `c` the number of responses to `s_i` inside the kernel, and
//!
//! ```text
//! I(R,S; n_h) = (1/n_r) * sum_i log2( n_s * c_i / n_h )
//! ```

use rayon::prelude::*;
use serde::Serialize;

use super::{ConfigEcho, EstimatorKind, MiEstimate};
use crate::data::{LabeledDataset, StimulusId};
use crate::error::{Error, Result};
use crate::metrics::{rank_cmp, DistanceMatrix};

/// Kernel size, in one of three equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    /// Probability mass `h` in (0, 1]; resolves to `floor(h * n_r)` points.
    Fraction(f64),
    /// An explicit point count `n_h`.
    Count(usize),
    /// `n_h = n_t`.
    TrialsPerStimulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            bandwidth: Bandwidth::TrialsPerStimulus,
        }
    }
}

impl KernelConfig {
    pub fn with_count(n_h: usize) -> Self {
        KernelConfig {
            bandwidth: Bandwidth::Count(n_h),
        }
    }

    pub fn with_fraction(h: f64) -> Self {
        KernelConfig {
            bandwidth: Bandwidth::Fraction(h),
        }
    }

    /// Number of points in the kernel for a dataset of `n_r` responses with `n_t` trials each.
    pub fn resolve(&self, n_r: usize, n_t: usize) -> Result<usize> {
        let n_h = match self.bandwidth {
            Bandwidth::Fraction(h) => {
                if !(h > 0.0 && h <= 1.0) {
                    return Err(Error::invalid(format!("bandwidth fraction {h} not in (0, 1]")));
                }
                (h * n_r as f64).floor() as usize
            }
            Bandwidth::Count(n) => n,
            Bandwidth::TrialsPerStimulus => n_t,
        };
        if n_h == 0 {
            return Err(Error::invalid(format!(
                "bandwidth {:?} resolves to 0 points for n_r = {n_r}",
                self.bandwidth
            )));
        }
        if n_h > n_r {
            return Err(Error::invalid(format!("n_h = {n_h} exceeds n_r = {n_r}")));
        }
        Ok(n_h)
    }
}

/// Reusable scratch for per-centre selection.
#[derive(Default)]
pub(crate) struct Scratch {
    others: Vec<usize>,
}

fn kernel_count_with(
    dm: &DistanceMatrix,
    labels: &[StimulusId],
    i: usize,
    n_h: usize,
    scratch: &mut Scratch,
) -> usize {
    let row = dm.row(i);
    let others = &mut scratch.others;
    others.clear();
    others.extend((0..dm.n()).filter(|&j| j != i));
    let take = n_h - 1;
    if take == 0 {
        return 1;
    }
    if take < others.len() {
        others.select_nth_unstable_by(take - 1, |&a, &b| rank_cmp(row, a, b));
    }
    1 + others[..take].iter().filter(|&&j| labels[j] == labels[i]).count()
}

/// `c(i; n_h)`: responses to the same stimulus as `i` among the `n_h`
/// nearest responses to `i`, `i` itself included.
///
/// Neighbours are ranked by `(distance, index)`. The centre always belongs to
/// its own kernel, even when an identical response has a smaller index, so the
/// result lies in `[1, min(n_h, n_t)]`.
pub fn neighbor_count_c(dm: &DistanceMatrix, labels: &[StimulusId], i: usize, n_h: usize) -> Result<usize> {
    check_inputs(dm, labels)?;
    if i >= dm.n() {
        return Err(Error::invalid(format!("index {i} out of range for {} points", dm.n())));
    }
    if n_h == 0 || n_h > dm.n() {
        return Err(Error::invalid(format!("n_h = {n_h} not in [1, {}]", dm.n())));
    }
    Ok(kernel_count_with(dm, labels, i, n_h, &mut Scratch::default()))
}

pub(crate) fn check_inputs(dm: &DistanceMatrix, labels: &[StimulusId]) -> Result<()> {
    if dm.n() != labels.len() {
        return Err(Error::invalid(format!(
            "distance matrix has {} rows but dataset has {} responses",
            dm.n(),
            labels.len()
        )));
    }
    Ok(())
}

/// `c(i; n_h)` for every response.
pub fn kernel_counts(dm: &DistanceMatrix, labels: &[StimulusId], n_h: usize) -> Result<Vec<usize>> {
    check_inputs(dm, labels)?;
    if n_h == 0 || n_h > dm.n() {
        return Err(Error::invalid(format!("n_h = {n_h} not in [1, {}]", dm.n())));
    }
    Ok((0..dm.n())
        .into_par_iter()
        .map_init(Scratch::default, |s, i| kernel_count_with(dm, labels, i, n_h, s))
        .collect())
}

fn bits_from_counts(counts: &[usize], n_s: usize, n_h: usize) -> f64 {
    // Group equal counts so identical terms are summed exactly.
    let mut hist = vec![0usize; n_h + 1];
    for &c in counts {
        hist[c] += 1;
    }
    let n_r = counts.len() as f64;
    hist.iter()
        .enumerate()
        .filter(|&(_, &k)| k > 0)
        .map(|(c, &k)| (k as f64 / n_r) * ((n_s * c) as f64 / n_h as f64).log2())
        .sum()
}

/// Every row's neighbours in rank order, self excluded.
///
/// Ranking a subset by `(distance, index)` keeps the relative order of the
/// full ranking, so kernel counts on any subset can be read off this table
/// without building a reduced distance matrix.
pub(crate) struct NeighborTable {
    n: usize,
    order: Vec<u32>,
}

impl NeighborTable {
    pub(crate) fn new(dm: &DistanceMatrix) -> Self {
        let n = dm.n();
        let rows: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = dm.row(i);
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                others.sort_unstable_by(|&a, &b| rank_cmp(row, a, b));
                others.into_iter().map(|j| j as u32).collect()
            })
            .collect();
        NeighborTable {
            n,
            order: rows.concat(),
        }
    }

    fn row(&self, i: usize) -> &[u32] {
        let w = self.n - 1;
        &self.order[i * w..(i + 1) * w]
    }

    /// Kernel estimate in bits on the responses `idx` (ascending), with
    /// `labels` indexed like the full table.
    pub(crate) fn subset_bits(&self, labels: &[StimulusId], idx: &[usize], n_s: usize, n_h: usize) -> f64 {
        let mut member = vec![false; self.n];
        for &i in idx {
            member[i] = true;
        }
        let counts: Vec<usize> = idx
            .par_iter()
            .map(|&i| {
                let mut same = 1;
                for &j in self.row(i).iter().filter(|&&j| member[j as usize]).take(n_h - 1) {
                    same += usize::from(labels[j as usize] == labels[i]);
                }
                same
            })
            .collect();
        bits_from_counts(&counts, n_s, n_h)
    }
}

/// Kernel estimate of I(R;S) in bits.
pub fn kernel_mi(d: &LabeledDataset, dm: &DistanceMatrix, cfg: &KernelConfig) -> Result<MiEstimate> {
    let n_h = cfg.resolve(d.n_r(), d.n_t())?;
    let counts = kernel_counts(dm, d.labels(), n_h)?;
    let bits = bits_from_counts(&counts, d.n_s(), n_h);

    Ok(MiEstimate {
        estimator: EstimatorKind::Kernel,
        config: ConfigEcho::Kernel {
            bandwidth: cfg.bandwidth,
            n_h,
        },
        bits,
    })
}
