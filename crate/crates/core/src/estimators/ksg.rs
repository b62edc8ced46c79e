//! Nearest-neighbour (digamma) estimator for a discrete stimulus.
//!
//! ```text
//! I_e = psi(n_k) + psi(n_s n_t) - psi(n_t) - (1/n_r) sum_i psi(C_i)
//! ```
//!
//! where `C_i` counts the responses, of any stimulus, no farther from `i` than
//! its `n_k`-th nearest same-stimulus response.

use rayon::prelude::*;
use serde::Serialize;

use super::digamma::psi;
use super::kernel::check_inputs;
use super::{ConfigEcho, EstimatorKind, MiEstimate};
use crate::data::{LabeledDataset, StimulusId};
use crate::error::{Error, Result};
use crate::metrics::{rank_cmp, DistanceMatrix};

/// Whether the centre counts as its own first same-stimulus neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfNeighbor {
    /// The `n_k`-th neighbour is searched among the other responses; `C` excludes the centre.
    #[default]
    Excluded,
    /// The centre is a neighbour of itself and is included in `C`.
    Included,
}

/// How "at most distance d" is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Compare `(distance, index)` ranks, so equal distances never double count.
    #[default]
    Rank,
    /// Compare raw distances; every response tied with the threshold is counted.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsgConfig {
    pub n_k: usize,
    pub self_neighbor: SelfNeighbor,
    pub ties: TieRule,
}

impl KsgConfig {
    pub fn new(n_k: usize) -> Self {
        KsgConfig {
            n_k,
            self_neighbor: SelfNeighbor::Excluded,
            ties: TieRule::Rank,
        }
    }

    fn validate(&self, n_t: usize) -> Result<()> {
        if self.n_k == 0 {
            return Err(Error::invalid("n_k must be >= 1"));
        }
        let available = match self.self_neighbor {
            SelfNeighbor::Excluded => n_t.saturating_sub(1),
            SelfNeighbor::Included => n_t,
        };
        if self.n_k > available {
            return Err(Error::invalid(format!(
                "n_k = {} needs that many same-stimulus neighbours but only {available} exist (n_t = {n_t})",
                self.n_k
            )));
        }
        Ok(())
    }
}

fn ball_count_with(
    dm: &DistanceMatrix,
    labels: &[StimulusId],
    i: usize,
    cfg: &KsgConfig,
    same: &mut Vec<usize>,
) -> usize {
    let row = dm.row(i);
    let include_self = cfg.self_neighbor == SelfNeighbor::Included;
    same.clear();
    same.extend((0..dm.n()).filter(|&j| labels[j] == labels[i] && (include_self || j != i)));
    let k = cfg.n_k - 1;
    let (_, &mut pivot, _) = same.select_nth_unstable_by(k, |&a, &b| rank_cmp(row, a, b));
    let candidates = (0..dm.n()).filter(|&j| include_self || j != i);
    match cfg.ties {
        TieRule::Rank => candidates.filter(|&j| rank_cmp(row, j, pivot).is_le()).count(),
        TieRule::Distance => candidates.filter(|&j| row[j] <= row[pivot]).count(),
    }
}

/// `C(i; n_k)` for response `i`.
pub fn neighbor_count_ball(
    dm: &DistanceMatrix,
    labels: &[StimulusId],
    i: usize,
    cfg: &KsgConfig,
) -> Result<usize> {
    check_inputs(dm, labels)?;
    if i >= dm.n() {
        return Err(Error::invalid(format!("index {i} out of range for {} points", dm.n())));
    }
    let n_same = labels.iter().filter(|&&l| l == labels[i]).count();
    cfg.validate(n_same)?;
    Ok(ball_count_with(dm, labels, i, cfg, &mut Vec::new()))
}

/// Digamma estimate of I(R;S), reported in bits.
pub fn ksg_mi(d: &LabeledDataset, dm: &DistanceMatrix, cfg: &KsgConfig) -> Result<MiEstimate> {
    check_inputs(dm, d.labels())?;
    cfg.validate(d.n_t())?;
    let labels = d.labels();
    let counts: Vec<usize> = (0..dm.n())
        .into_par_iter()
        .map_init(Vec::new, |same, i| ball_count_with(dm, labels, i, cfg, same))
        .collect();

    let mut hist = vec![0usize; d.n_r() + 1];
    for &c in &counts {
        hist[c] += 1;
    }
    let n_r = d.n_r() as f64;
    let mean_psi: f64 = hist
        .iter()
        .enumerate()
        .filter(|&(_, &k)| k > 0)
        .map(|(c, &k)| (k as f64 / n_r) * psi(c as f64))
        .sum();
    // Paired so that the n_s = 1 and separated-cluster cases cancel exactly.
    let nats = (psi(cfg.n_k as f64) - mean_psi) + (psi(d.n_r() as f64) - psi(d.n_t() as f64));

    Ok(MiEstimate {
        estimator: EstimatorKind::Ksg,
        config: ConfigEcho::Ksg(*cfg),
        bits: nats / std::f64::consts::LN_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ResponsePoint;
    use crate::metrics::{distance_matrix, MetricSpec};

    fn line(points: &[(usize, f64)]) -> (LabeledDataset, DistanceMatrix) {
        let d = LabeledDataset::new(
            points.iter().map(|&(_, x)| ResponsePoint::Vector(vec![x])).collect(),
            points.iter().map(|&(s, _)| StimulusId(s)).collect(),
        )
        .unwrap();
        let dm = distance_matrix(&d, &MetricSpec::Euclidean).unwrap();
        (d, dm)
    }

    #[test]
    fn interleaved_line() {
        // A@0, B@1, A@2, B@3
        let (d, dm) = line(&[(0, 0.0), (1, 1.0), (0, 2.0), (1, 3.0)]);
        let cfg = KsgConfig::new(1);
        // from A@0 the other A sits at rank 2 behind B@1
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 0, &cfg).unwrap(), 2);
        // from B@1: A@0 and A@2 tie at distance 1, B@3 at distance 2
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 1, &cfg).unwrap(), 3);
        let dist = KsgConfig {
            ties: TieRule::Distance,
            ..cfg
        };
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 1, &dist).unwrap(), 3);
    }

    #[test]
    fn tie_rules_differ_on_ties() {
        // from index 0: B@1 (idx 1) and A@-1 (idx 2) tie at distance 1
        let (d, dm) = line(&[(0, 0.0), (1, 1.0), (0, -1.0), (1, 5.0)]);
        let rank = KsgConfig::new(1);
        let dist = KsgConfig {
            ties: TieRule::Distance,
            ..rank
        };
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 0, &rank).unwrap(), 2);
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 0, &dist).unwrap(), 2);
        // same geometry, labels swapped so the tie is resolved the other way
        let (d, dm) = line(&[(0, 0.0), (0, 1.0), (1, -1.0), (1, 5.0)]);
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 0, &rank).unwrap(), 1);
        assert_eq!(neighbor_count_ball(&dm, d.labels(), 0, &dist).unwrap(), 2);
    }

    #[test]
    fn included_self_degenerates_at_one() {
        let (d, dm) = line(&[(0, 0.0), (1, 1.0), (0, 2.0), (1, 3.0)]);
        let cfg = KsgConfig {
            self_neighbor: SelfNeighbor::Included,
            ..KsgConfig::new(1)
        };
        for i in 0..4 {
            assert_eq!(neighbor_count_ball(&dm, d.labels(), i, &cfg).unwrap(), 1);
        }
    }

    #[test]
    fn separated_clusters() {
        let pts: Vec<_> = (0..2)
            .flat_map(|s| (0..4).map(move |t| (s, 50.0 * s as f64 + 0.1 * t as f64)))
            .collect();
        let (d, dm) = line(&pts);
        let est = ksg_mi(&d, &dm, &KsgConfig::new(2)).unwrap();
        let expected = (0.25 + 0.2 + 1.0 / 6.0 + 1.0 / 7.0) / std::f64::consts::LN_2;
        assert!((est.bits - expected).abs() < 1e-9, "{}", est.bits);
        assert!((est.bits - 1.0958).abs() < 1e-4);
    }

    #[test]
    fn single_stimulus_is_exactly_zero() {
        let (d, dm) = line(&[(0, 0.3), (0, 1.0), (0, -2.0), (0, 0.9), (0, 5.0)]);
        for n_k in 1..5 {
            assert_eq!(ksg_mi(&d, &dm, &KsgConfig::new(n_k)).unwrap().bits, 0.0);
            for i in 0..5 {
                assert_eq!(neighbor_count_ball(&dm, d.labels(), i, &KsgConfig::new(n_k)).unwrap(), n_k);
            }
        }
    }

    #[test]
    fn too_few_same_stimulus_neighbours() {
        let (d, dm) = line(&[(0, 0.0), (1, 1.0), (0, 2.0), (1, 3.0)]);
        assert!(ksg_mi(&d, &dm, &KsgConfig::new(2)).is_err());
        assert!(ksg_mi(&d, &dm, &KsgConfig::new(0)).is_err());
        assert!(neighbor_count_ball(&dm, d.labels(), 0, &KsgConfig::new(2)).is_err());
    }
}
