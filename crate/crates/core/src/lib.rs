//! Mutual information between a discrete stimulus and responses in a metric
//! space.
//!
//! Responses (spike trains or vectors) are only ever compared through a
//! distance, so the same estimators work for any metric:
//!
//! * [`estimators::kernel_mi`]: square-kernel density estimate whose bandwidth
//!   is a probability mass, turned into a nearest-neighbour count.
//! * [`estimators::ksg_mi`]: digamma nearest-neighbour estimate.
//! * [`estimators::histogram_mi`]: plug-in baseline on a regular grid.
//!
//! [`bias`] removes the leading finite-sample bias by extrapolating estimates
//! made on subsamples, and [`toybench`] measures estimator accuracy on
//! synthetic data with known information.
//!
//! ```
//! use spikemi::data::{LabeledDataset, ResponsePoint, StimulusId};
//! use spikemi::estimators::{kernel_mi, KernelConfig};
//! use spikemi::metrics::{distance_matrix, MetricSpec};
//!
//! let trains = [
//!     (0, vec![0.010, 0.052]),
//!     (0, vec![0.012, 0.049]),
//!     (1, vec![0.200]),
//!     (1, vec![0.210]),
//! ];
//! let d = LabeledDataset::new(
//!     trains.iter().map(|(_, t)| ResponsePoint::SpikeTrain(t.clone())).collect(),
//!     trains.iter().map(|(s, _)| StimulusId(*s)).collect(),
//! )
//! .unwrap();
//! let dm = distance_matrix(&d, &MetricSpec::VictorPurpura { q: 20.0 }).unwrap();
//! let est = kernel_mi(&d, &dm, &KernelConfig::default()).unwrap();
//! assert_eq!(est.bits, 1.0);
//! ```

pub mod bias;
pub mod data;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod rng;
pub mod toybench;

pub use error::{Error, Result};
