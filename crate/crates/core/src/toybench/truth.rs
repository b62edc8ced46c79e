//! Ground truth for the toy model: Monte-Carlo mutual information and the
//! chi density of source-to-response distances.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

/// Default Monte-Carlo sample count for [`true_mi`].
pub const DEFAULT_MC_SAMPLES: usize = 10_000;

/// Below this variance the channel is treated as noiseless.
pub const NOISELESS_SIGMA2: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloMi {
    pub bits: f64,
    /// Standard error of the sample mean, before clamping.
    pub std_error: f64,
}

/// Monte-Carlo estimate of I(R;S) for equiprobable sources with isotropic
/// Gaussian noise of variance `sigma2` per component.
///
/// Draws `(s, r)` from the model and averages `log2 p(r|s) / p(r)`. The result
/// is clamped to `[0, log2 n_s]`.
pub fn true_mi(sources: &[Vec<f64>], sigma2: f64, mc_samples: usize, seed: u64) -> Result<f64> {
    true_mi_detailed(sources, sigma2, mc_samples, seed).map(|m| m.bits)
}

pub fn true_mi_detailed(
    sources: &[Vec<f64>],
    sigma2: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<MonteCarloMi> {
    let n_s = sources.len();
    if n_s == 0 {
        return Err(Error::invalid("no sources"));
    }
    let n_d = sources[0].len();
    if n_d == 0 || sources.iter().any(|s| s.len() != n_d) {
        return Err(Error::invalid("sources must share a nonzero dimension"));
    }
    if mc_samples == 0 {
        return Err(Error::invalid("mc_samples must be >= 1"));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::invalid(format!(
            "sigma2 = {sigma2}: the densities are degenerate; the information is log2 n_s"
        )));
    }
    let max_bits = (n_s as f64).log2();
    if sigma2 < NOISELESS_SIGMA2 {
        return Ok(MonteCarloMi {
            bits: max_bits,
            std_error: 0.0,
        });
    }

    let sigma = sigma2.sqrt();
    let mut rng = rng::stream(seed, &[rng::purpose::TRUE_MI]);
    let mut r = vec![0.0; n_d];
    let mut expo = vec![0.0; n_s];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..mc_samples {
        let s = rng.random_range(0..n_s);
        for (rk, &sk) in r.iter_mut().zip(&sources[s]) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *rk = sk + sigma * z;
        }
        for (e, src) in expo.iter_mut().zip(sources) {
            let d2: f64 = src.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum();
            *e = -d2 / (2.0 * sigma2);
        }
        let top = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + expo.iter().map(|e| (e - top).exp()).sum::<f64>().ln();
        // ln p(r|s) - ln p(r), normalising constants cancel
        let term = (expo[s] - lse + (n_s as f64).ln()) / LN_2;
        sum += term;
        sum_sq += term * term;
    }
    let n = mc_samples as f64;
    let mean = sum / n;
    let var = if mc_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MonteCarloMi {
        bits: mean.clamp(0.0, max_bits),
        std_error: (var / n).sqrt(),
    })
}

/// ln Gamma(n / 2) for a positive integer `n`.
fn ln_gamma_half(n: usize) -> f64 {
    if n % 2 == 0 {
        // (n/2 - 1)!
        (1..n / 2).map(|k| (k as f64).ln()).sum()
    } else {
        // sqrt(pi) * prod_{k < (n-1)/2} (k + 1/2)
        0.5 * PI.ln() + (0..(n - 1) / 2).map(|k| (k as f64 + 0.5).ln()).sum::<f64>()
    }
}

/// Density of the distance between a response and its source when each of the
/// `n_d` components carries independent N(0, sigma^2) noise.
///
/// This is the chi density with `n_d` degrees of freedom in `dist / sigma`,
/// times the `1/sigma` Jacobian that makes it a density in `dist`.
pub fn chi_density(dist: f64, n_d: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma = {sigma} must be finite and > 0")));
    }
    if n_d == 0 {
        return Err(Error::invalid("n_d must be >= 1"));
    }
    if !(dist >= 0.0) {
        return Err(Error::invalid(format!("distance {dist} must be >= 0")));
    }
    let k = n_d as f64;
    let x = dist / sigma;
    if x == 0.0 && n_d > 1 {
        return Ok(0.0);
    }
    let power = if n_d == 1 { 0.0 } else { (k - 1.0) * x.ln() };
    let ln_p = (1.0 - k / 2.0) * 2f64.ln() - ln_gamma_half(n_d) + power - x * x / 2.0;
    Ok(ln_p.exp() / sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_integers() {
        assert!((ln_gamma_half(1) - PI.sqrt().ln()).abs() < 1e-14);
        assert!(ln_gamma_half(2).abs() < 1e-14);
        assert!((ln_gamma_half(3) - (0.5 * PI.sqrt()).ln()).abs() < 1e-14);
        assert!((ln_gamma_half(10) - 24f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn one_dof_is_half_normal() {
        let sigma = 0.7;
        for d in [0.0, 0.1, 0.5, 1.3, 3.0] {
            let half_normal = (2.0 / PI).sqrt() / sigma * (-d * d / (2.0 * sigma * sigma)).exp();
            assert!((chi_density(d, 1, sigma).unwrap() - half_normal).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_location() {
        for n_d in [2, 3, 5, 10] {
            let sigma = 0.4;
            let mode = sigma * ((n_d - 1) as f64).sqrt();
            let at = chi_density(mode, n_d, sigma).unwrap();
            assert!(at > chi_density(mode * 0.99, n_d, sigma).unwrap());
            assert!(at > chi_density(mode * 1.01, n_d, sigma).unwrap());
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(chi_density(1.0, 3, 0.0).is_err());
        assert!(chi_density(-1.0, 3, 1.0).is_err());
        assert!(chi_density(1.0, 0, 1.0).is_err());
        let src = vec![vec![0.0], vec![1.0]];
        assert!(true_mi(&src, 0.0, 10, 0).is_err());
        assert!(true_mi(&src, 0.1, 0, 0).is_err());
        assert_eq!(true_mi(&src, 1e-12, 10, 0).unwrap(), 1.0);
    }

    #[test]
    fn identical_sources_carry_nothing() {
        let src = vec![vec![0.1, 0.2]; 4];
        let m = true_mi_detailed(&src, 0.3, 2000, 5).unwrap();
        assert!(m.bits < 1e-12);
        assert!(m.std_error < 1e-12);
    }
}
