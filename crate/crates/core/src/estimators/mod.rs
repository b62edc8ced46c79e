//! Mutual-information estimators.
//!
//! * [`kernel_mi`]: square kernel with a volume bandwidth, computed by counting.
//! * [`ksg_mi`]: the digamma nearest-neighbour estimator for a discrete stimulus.
//! * [`histogram_mi`]: plug-in estimate on a regular grid, vector data only.
//!
//! The first two depend on the responses only through neighbour ranks in a
//! [`DistanceMatrix`], so any strictly increasing transform of the distances
//! leaves them unchanged.

mod digamma;
mod histogram;
mod kernel;
mod ksg;

pub use digamma::digamma;
pub use histogram::{histogram_mi, HistogramConfig};
pub(crate) use kernel::NeighborTable;
pub use kernel::{kernel_counts, kernel_mi, neighbor_count_c, Bandwidth, KernelConfig};
pub use ksg::{ksg_mi, neighbor_count_ball, KsgConfig, SelfNeighbor, TieRule};

use serde::Serialize;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Kernel,
    Ksg,
    Histogram,
}

/// The configuration an estimate was computed with, after resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ConfigEcho {
    Kernel { bandwidth: Bandwidth, n_h: usize },
    Ksg(KsgConfig),
    Histogram(HistogramConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiEstimate {
    pub estimator: EstimatorKind,
    pub config: ConfigEcho,
    pub bits: f64,
}

/// An estimator together with its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "estimator", rename_all = "kebab-case")]
pub enum Estimator {
    Kernel(KernelConfig),
    Ksg(KsgConfig),
    Histogram(HistogramConfig),
}

impl Estimator {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            Estimator::Kernel(_) => EstimatorKind::Kernel,
            Estimator::Ksg(_) => EstimatorKind::Ksg,
            Estimator::Histogram(_) => EstimatorKind::Histogram,
        }
    }

    /// Whether [`Estimator::estimate`] needs a distance matrix.
    pub fn needs_distances(&self) -> bool {
        !matches!(self, Estimator::Histogram(_))
    }

    pub fn estimate(&self, d: &LabeledDataset, dm: Option<&DistanceMatrix>) -> Result<MiEstimate> {
        let need = || Error::invalid(format!("{:?} estimator needs a distance matrix", self.kind()));
        match self {
            Estimator::Kernel(cfg) => kernel_mi(d, dm.ok_or_else(need)?, cfg),
            Estimator::Ksg(cfg) => ksg_mi(d, dm.ok_or_else(need)?, cfg),
            Estimator::Histogram(cfg) => histogram_mi(d, cfg),
        }
    }
}
