//! Quadratic extrapolation in `1/n_t`.
//!
//! Estimates are assumed to behave like `I + A/n_t + B/n_t^2` for large `n_t`.
//! We estimate on stratified subsamples of the trials, fit that expansion by
//! least squares and report the intercept.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{subsample_indices, trials_for_fraction, LabeledDataset};
use crate::error::{Error, Result};
use crate::estimators::{Bandwidth, Estimator, KernelConfig, MiEstimate, NeighborTable};
use crate::metrics::DistanceMatrix;
use crate::rng;

/// Subsample fractions 0.1, 0.2, ..., 1.0.
pub fn default_lambdas() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}

/// Subsamples averaged per fraction below one.
pub const DEFAULT_REPEATS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveOptions {
    pub lambdas: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            lambdas: default_lambdas(),
            repeats: DEFAULT_REPEATS,
            seed: 0,
        }
    }
}

impl CurveOptions {
    /// Drop fractions that keep fewer than `min_trials` trials out of `n_t`.
    pub fn usable_for(&self, n_t: usize, min_trials: usize) -> CurveOptions {
        CurveOptions {
            lambdas: self
                .lambdas
                .iter()
                .copied()
                .filter(|&l| trials_for_fraction(l, n_t) >= min_trials)
                .collect(),
            ..self.clone()
        }
    }
}

/// Mean estimate at one subsample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub n_t: usize,
    pub bits: f64,
}

/// Least-squares fit of `bits = intercept + A/n_t + B/n_t^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasFit {
    pub intercept_bits: f64,
    #[serde(rename = "A_bits")]
    pub a_bits: f64,
    #[serde(rename = "B_bits")]
    pub b_bits: f64,
    /// Sum of squared residuals.
    pub residual: f64,
}

/// Kernel bandwidth for a subsample of `n_r_sub` out of `n_r` responses,
/// holding the bandwidth fraction fixed.
fn rescale(est: &Estimator, n_r: usize, n_r_sub: usize) -> Estimator {
    match est {
        Estimator::Kernel(KernelConfig {
            bandwidth: Bandwidth::Count(n_h),
        }) => Estimator::Kernel(KernelConfig::with_count(n_h * n_r_sub / n_r)),
        other => *other,
    }
}

/// Estimates at each subsample fraction, averaged over `repeats` stratified
/// subsamples (a fraction keeping every trial is evaluated once).
///
/// Every `(fraction, repeat)` pair draws from its own random stream, so the
/// curve does not depend on how the work is scheduled.
pub fn subsample_curve(
    d: &LabeledDataset,
    dm: Option<&DistanceMatrix>,
    est: &Estimator,
    opts: &CurveOptions,
) -> Result<Vec<CurvePoint>> {
    if opts.lambdas.is_empty() {
        return Err(Error::invalid("empty subsample fraction list"));
    }
    if opts.repeats == 0 {
        return Err(Error::invalid("repeats must be >= 1"));
    }
    for &l in &opts.lambdas {
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::invalid(format!("subsample fraction {l} not in (0, 1]")));
        }
        let n_t_sub = trials_for_fraction(l, d.n_t());
        if n_t_sub < 2 {
            return Err(Error::invalid(format!(
                "subsample fraction {l} keeps {n_t_sub} trial(s) of {}; at least 2 are needed",
                d.n_t()
            )));
        }
    }
    if est.needs_distances() && dm.is_none() {
        return Err(Error::invalid("estimator needs a distance matrix"));
    }

    let jobs: Vec<(usize, usize)> = opts
        .lambdas
        .iter()
        .enumerate()
        .flat_map(|(li, &l)| {
            let reps = if trials_for_fraction(l, d.n_t()) >= d.n_t() { 1 } else { opts.repeats };
            (0..reps).map(move |r| (li, r))
        })
        .collect();

    // Kernel estimates on subsets only need the full neighbour ranking.
    let table = match (est, dm) {
        (Estimator::Kernel(_), Some(m)) if jobs.len() > 1 => Some(NeighborTable::new(m)),
        _ => None,
    };

    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(li, r)| -> Result<f64> {
            let lambda = opts.lambdas[li];
            let sub_seed = rng::derive_seed(opts.seed, &[li as u64, r as u64]);
            let idx = subsample_indices(d, lambda, sub_seed)?;
            if idx.len() == d.n_r() {
                return Ok(est.estimate(d, dm)?.bits);
            }
            let sub_est = rescale(est, d.n_r(), idx.len());
            if let (Some(t), Estimator::Kernel(cfg)) = (&table, sub_est) {
                let n_h = cfg.resolve(idx.len(), trials_for_fraction(lambda, d.n_t()))?;
                return Ok(t.subset_bits(d.labels(), &idx, d.n_s(), n_h));
            }
            let sub = d.select(&idx)?;
            let sub_dm = dm.map(|m| m.submatrix(&idx));
            Ok(sub_est.estimate(&sub, sub_dm.as_ref())?.bits)
        })
        .collect::<Result<_>>()?;

    let mut curve = Vec::with_capacity(opts.lambdas.len());
    let mut k = 0;
    for (li, &lambda) in opts.lambdas.iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0;
        while k < jobs.len() && jobs[k].0 == li {
            sum += values[k];
            count += 1;
            k += 1;
        }
        curve.push(CurvePoint {
            lambda,
            n_t: trials_for_fraction(lambda, d.n_t()),
            bits: sum / count as f64,
        });
    }
    Ok(curve)
}

/// Ordinary least squares of `bits` on `(1, 1/n_t, 1/n_t^2)`.
pub fn quadratic_extrapolate(curve: &[CurvePoint]) -> Result<BiasFit> {
    let mut sizes: Vec<usize> = curve.iter().map(|p| p.n_t).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "{} distinct subsample sizes, need at least 3",
            sizes.len()
        )));
    }
    if sizes[0] == 0 {
        return Err(Error::invalid("subsample size 0"));
    }

    let xs: Vec<f64> = curve.iter().map(|p| 1.0 / p.n_t as f64).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.bits).collect();

    // Centre and scale x so the three columns are well conditioned.
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let s = xs.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
    let us: Vec<f64> = xs.iter().map(|x| (x - m) / s).collect();
    let cols = [
        vec![1.0; us.len()],
        us.clone(),
        us.iter().map(|u| u * u).collect::<Vec<_>>(),
    ];
    let [a, b, c] = least_squares3(&cols, &ys)?;

    let b_bits = c / (s * s);
    let a_bits = b / s - 2.0 * c * m / (s * s);
    let intercept_bits = a - b * m / s + c * m * m / (s * s);

    let residual = xs
        .iter()
        .zip(&us)
        .zip(&ys)
        .map(|((_, &u), &y)| {
            let r = y - (a + b * u + c * u * u);
            r * r
        })
        .sum();

    Ok(BiasFit {
        intercept_bits,
        a_bits,
        b_bits,
        residual,
    })
}

/// Householder QR least squares for a tall matrix with three columns.
fn least_squares3(cols: &[Vec<f64>; 3], y: &[f64]) -> Result<[f64; 3]> {
    let n = y.len();
    let mut a: Vec<[f64; 3]> = (0..n).map(|i| [cols[0][i], cols[1][i], cols[2][i]]).collect();
    let mut rhs = y.to_vec();
    let scale: f64 = a.iter().flat_map(|r| r.iter()).fold(0.0, |m, v| m.max(v.abs()));

    for k in 0..3 {
        let norm = (k..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale.max(1.0) {
            return Err(Error::RankDeficient(format!("column {k} is dependent on the others")));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for j in k..3 {
            let dot: f64 = (k..n).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..n).map(|i| v[i - k] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..n {
            rhs[i] -= f * v[i - k];
        }
    }

    let mut coef = [0.0; 3];
    for k in (0..3).rev() {
        let tail: f64 = (k + 1..3).map(|j| a[k][j] * coef[j]).sum();
        coef[k] = (rhs[k] - tail) / a[k][k];
    }
    Ok(coef)
}

/// Full-data estimate, subsample curve and fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasCorrected {
    pub raw: MiEstimate,
    pub curve: Vec<CurvePoint>,
    pub fit: BiasFit,
}

impl BiasCorrected {
    pub fn corrected_bits(&self) -> f64 {
        self.fit.intercept_bits
    }
}

/// Estimate with quadratic bias correction.
pub fn bias_corrected(
    d: &LabeledDataset,
    dm: Option<&DistanceMatrix>,
    est: &Estimator,
    opts: &CurveOptions,
) -> Result<BiasCorrected> {
    let raw = est.estimate(d, dm)?;
    let curve = subsample_curve(d, dm, est, opts)?;
    let fit = quadratic_extrapolate(&curve)?;
    Ok(BiasCorrected { raw, curve, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(i: f64, a: f64, b: f64, sizes: &[usize]) -> Vec<CurvePoint> {
        sizes
            .iter()
            .map(|&n| {
                let x = 1.0 / n as f64;
                CurvePoint {
                    lambda: 1.0,
                    n_t: n,
                    bits: i + a * x + b * x * x,
                }
            })
            .collect()
    }

    #[test]
    fn exact_quadratic_recovered() {
        let sizes: Vec<usize> = (1..=10).map(|k| 20 * k).collect();
        let fit = quadratic_extrapolate(&synthetic(0.5, 1.0, 2.0, &sizes)).unwrap();
        assert!((fit.intercept_bits - 0.5).abs() < 1e-9, "{fit:?}");
        assert!((fit.a_bits - 1.0).abs() < 1e-9, "{fit:?}");
        assert!((fit.b_bits - 2.0).abs() < 1e-9, "{fit:?}");
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn constant_curve() {
        let sizes = [2, 3, 5, 8, 10];
        let fit = quadratic_extrapolate(&synthetic(1.25, 0.0, 0.0, &sizes)).unwrap();
        assert!((fit.intercept_bits - 1.25).abs() < 1e-9);
        assert!(fit.a_bits.abs() < 1e-9);
        assert!(fit.b_bits.abs() < 1e-9);
    }

    #[test]
    fn two_sizes_rank_deficient() {
        let pts = synthetic(0.1, 1.0, 0.0, &[10, 20, 10, 20]);
        assert!(matches!(quadratic_extrapolate(&pts), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn shift_equivariance() {
        let sizes = [4, 6, 9, 13, 20];
        let mut pts = synthetic(0.3, -2.0, 5.0, &sizes);
        pts[2].bits += 0.01;
        let f1 = quadratic_extrapolate(&pts).unwrap();
        for p in &mut pts {
            p.bits += 0.75;
        }
        let f2 = quadratic_extrapolate(&pts).unwrap();
        assert!((f2.intercept_bits - f1.intercept_bits - 0.75).abs() < 1e-9);
        assert!((f2.a_bits - f1.a_bits).abs() < 1e-9);
        assert!((f2.b_bits - f1.b_bits).abs() < 1e-9);
    }

    #[test]
    fn usable_lambdas_filter() {
        let opts = CurveOptions::default().usable_for(10, 2);
        assert_eq!(opts.lambdas.len(), 9);
        assert_eq!(opts.lambdas[0], 0.2);
    }
}
