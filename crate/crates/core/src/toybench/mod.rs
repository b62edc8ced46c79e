//! Toy model and accuracy benchmark.
//!
//! A toy dataset has `n_s` sources drawn uniformly from the unit box
//! `[-0.5, 0.5]^n_d`; each of the `n_t` responses to a source adds independent
//! `N(0, sigma^2)` noise to every component. The ground-truth information is
//! known up to Monte-Carlo error, which makes the model a yardstick for the
//! estimators.

mod bench;
mod truth;

pub use bench::{
    run_benchmark, write_outputs, BenchmarkConfig, BenchmarkResult, BenchmarkSummary, DatasetRecord,
    Protocol, WidthSummary, DEFAULT_HIST_WIDTHS,
};
pub use truth::{chi_density, true_mi, true_mi_detailed, MonteCarloMi, DEFAULT_MC_SAMPLES, NOISELESS_SIGMA2};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::data::{LabeledDataset, ResponsePoint, StimulusId};
use crate::error::{Error, Result};
use crate::rng::{self, purpose};

/// Noise variance of a toy dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sigma2 {
    Fixed(f64),
    /// Drawn uniformly from `[0, 1)`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToySpec {
    pub n_s: usize,
    pub n_d: usize,
    pub n_t: usize,
    pub sigma2: Sigma2,
    pub seed: u64,
}

impl ToySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_s < 2 || self.n_d < 1 || self.n_t < 2 {
            return Err(Error::invalid(format!(
                "toy spec needs n_s >= 2, n_d >= 1, n_t >= 2 (got {}, {}, {})",
                self.n_s, self.n_d, self.n_t
            )));
        }
        if let Sigma2::Fixed(v) = self.sigma2 {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("sigma2 = {v} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// The noise variance this spec resolves to.
    pub fn resolve_sigma2(&self) -> f64 {
        match self.sigma2 {
            Sigma2::Fixed(v) => v,
            Sigma2::Uniform => rng::stream(self.seed, &[purpose::SIGMA]).random::<f64>(),
        }
    }

    /// Source vectors, uniform in the unit box centred at the origin.
    pub fn sources(&self) -> Vec<Vec<f64>> {
        let mut rng = rng::stream(self.seed, &[purpose::SOURCES]);
        (0..self.n_s)
            .map(|_| (0..self.n_d).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect()
    }
}

/// A generated dataset with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyDataset {
    pub data: LabeledDataset,
    pub sources: Vec<Vec<f64>>,
    pub sigma2: f64,
}

/// Generate a toy dataset. Responses are ordered stimulus by stimulus.
pub fn generate_toy(spec: &ToySpec) -> Result<ToyDataset> {
    spec.validate()?;
    let sigma2 = spec.resolve_sigma2();
    let sources = spec.sources();
    let noise = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = rng::stream(spec.seed, &[purpose::RESPONSES]);
    let mut points = Vec::with_capacity(spec.n_s * spec.n_t);
    let mut labels = Vec::with_capacity(spec.n_s * spec.n_t);
    for (s, src) in sources.iter().enumerate() {
        for _ in 0..spec.n_t {
            points.push(ResponsePoint::Vector(
                src.iter().map(|&c| c + noise.sample(&mut rng)).collect(),
            ));
            labels.push(StimulusId(s));
        }
    }
    Ok(ToyDataset {
        data: LabeledDataset::new(points, labels)?,
        sources,
        sigma2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64) -> ToySpec {
        ToySpec {
            n_s: 4,
            n_d: 3,
            n_t: 5,
            sigma2: Sigma2::Uniform,
            seed,
        }
    }

    #[test]
    fn shape_and_box() {
        let toy = generate_toy(&spec(3)).unwrap();
        assert_eq!((toy.data.n_s(), toy.data.n_t(), toy.data.dim()), (4, 5, Some(3)));
        assert!(toy.sources.iter().flatten().all(|c| (-0.5..=0.5).contains(c)));
        assert!((0.0..1.0).contains(&toy.sigma2));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate_toy(&spec(11)).unwrap(), generate_toy(&spec(11)).unwrap());
        assert_ne!(generate_toy(&spec(11)).unwrap(), generate_toy(&spec(12)).unwrap());
    }

    #[test]
    fn validation() {
        let mut s = spec(0);
        s.n_s = 1;
        assert!(generate_toy(&s).is_err());
        let mut s = spec(0);
        s.sigma2 = Sigma2::Fixed(1.5);
        assert!(generate_toy(&s).is_err());
        let mut s = spec(0);
        s.sigma2 = Sigma2::Fixed(0.0);
        let toy = generate_toy(&s).unwrap();
        // noiseless responses sit on their sources
        for (i, p) in toy.data.points().iter().enumerate() {
            assert_eq!(p, &ResponsePoint::Vector(toy.sources[i / 5].clone()));
        }
    }
}
