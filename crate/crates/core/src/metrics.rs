//! Response metrics and the pairwise distance matrix.
//!
//! Estimators never look at responses directly. They see a [`DistanceMatrix`]
//! and, through [`neighbor_order`], only the rank of each point around a
//! centre. Ranks are taken under the total order `(distance, index)`.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::data::{format_real, LabeledDataset, ResponsePoint};
use crate::error::{Error, Result};

/// Which metric to use on responses.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricSpec {
    /// L2 distance on vector responses.
    Euclidean,
    /// Spike-train edit distance: insert/delete cost 1, shifting a spike by `dt` costs `q * |dt|`.
    VictorPurpura { q: f64 },
    /// L2 distance between trains filtered by a causal exponential with time constant `tau`.
    VanRossum { tau: f64 },
}

impl MetricSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricSpec::Euclidean => Ok(()),
            MetricSpec::VictorPurpura { q } if q.is_finite() && q >= 0.0 => Ok(()),
            MetricSpec::VictorPurpura { q } => {
                Err(Error::invalid(format!("victor-purpura cost q = {q} must be finite and >= 0")))
            }
            MetricSpec::VanRossum { tau } if tau.is_finite() && tau > 0.0 => Ok(()),
            MetricSpec::VanRossum { tau } => {
                Err(Error::invalid(format!("van-rossum tau = {tau} must be finite and > 0")))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::Euclidean => "euclidean",
            MetricSpec::VictorPurpura { .. } => "victor-purpura",
            MetricSpec::VanRossum { .. } => "van-rossum",
        }
    }
}

/// Distance between two responses under `m`.
pub fn distance(a: &ResponsePoint, b: &ResponsePoint, m: &MetricSpec) -> Result<f64> {
    match (m, a, b) {
        (MetricSpec::Euclidean, ResponsePoint::Vector(x), ResponsePoint::Vector(y)) => {
            if x.len() != y.len() {
                return Err(Error::MixedVariant(format!(
                    "vectors of dimension {} and {}",
                    x.len(),
                    y.len()
                )));
            }
            Ok(euclidean(x, y))
        }
        (MetricSpec::VictorPurpura { q }, ResponsePoint::SpikeTrain(x), ResponsePoint::SpikeTrain(y)) => {
            Ok(victor_purpura(x, y, *q))
        }
        (MetricSpec::VanRossum { tau }, ResponsePoint::SpikeTrain(x), ResponsePoint::SpikeTrain(y)) => {
            Ok(van_rossum(x, y, *tau))
        }
        (_, a, b) if a.variant_name() != b.variant_name() => Err(Error::MixedVariant(format!(
            "cannot compare a {} with a {}",
            a.variant_name(),
            b.variant_name()
        ))),
        (m, a, _) => Err(Error::MetricMismatch {
            metric: m.name(),
            variant: a.variant_name(),
        }),
    }
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Minimal edit cost turning train `a` into train `b`.
pub fn victor_purpura(a: &[f64], b: &[f64], q: f64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return (a.len() + b.len()) as f64;
    }
    // prev[j]: cost of a[..i] -> b[..j]
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, &ta) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64;
        for (j, &tb) in b.iter().enumerate() {
            let shift = prev[j] + q * (ta - tb).abs();
            let delete = prev[j + 1] + 1.0;
            let insert = cur[j] + 1.0;
            cur[j + 1] = shift.min(delete).min(insert);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn kernel_overlap(a: &[f64], b: &[f64], tau: f64) -> f64 {
    let mut s = 0.0;
    for &x in a {
        for &y in b {
            s += (-(x - y).abs() / tau).exp();
        }
    }
    s
}

/// van Rossum distance, evaluated in closed form.
///
/// With `f = sum_i exp(-(t - t_i)/tau) H(t - t_i)`, the integral
/// `(1/tau) * int (f - g)^2 dt` equals
/// `(S(a,a) + S(b,b) - 2 S(a,b)) / 2` where `S(x,y) = sum_ij exp(-|x_i - y_j|/tau)`.
pub fn van_rossum(a: &[f64], b: &[f64], tau: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let aa = kernel_overlap(a, a, tau);
    let bb = kernel_overlap(b, b, tau);
    let ab = kernel_overlap(a, b, tau);
    (0.5 * (aa + bb - 2.0 * ab)).max(0.0).sqrt()
}

/// Symmetric `n x n` matrix of nonnegative finite distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Build from row-major entries, checking the matrix invariants.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = entries[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::invalid(format!("entry ({i},{j}) = {d}")));
                }
                if d != entries[j * n + i] {
                    return Err(Error::invalid(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// The matrix restricted to `indices`, renumbered `0..indices.len()`.
    pub fn submatrix(&self, indices: &[usize]) -> DistanceMatrix {
        let m = indices.len();
        let mut entries = Vec::with_capacity(m * m);
        for &i in indices {
            let row = self.row(i);
            entries.extend(indices.iter().map(|&j| row[j]));
        }
        DistanceMatrix { n: m, entries }
    }

    /// Apply `f` to every off-diagonal entry. `f` must map nonnegative reals to
    /// nonnegative finite reals.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<DistanceMatrix> {
        let n = self.n;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, &d)| if k / n == k % n { 0.0 } else { f(d) })
            .collect();
        DistanceMatrix::from_entries(n, entries)
    }

    /// CSV, one row per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let line = self
                .row(i)
                .iter()
                .map(|&d| format_real(d))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// All pairwise distances of a dataset. Rows are computed in parallel; the
/// result does not depend on the schedule.
pub fn distance_matrix(d: &LabeledDataset, m: &MetricSpec) -> Result<DistanceMatrix> {
    m.validate()?;
    let n = d.n_r();
    let pts = d.points();
    // upper[i] holds d(i, j) for j > i
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| distance(&pts[i], &pts[j], m))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    DistanceMatrix::from_entries(n, entries)
}

/// `(distance, index)` comparison of two candidates around a centre.
#[inline]
pub(crate) fn rank_cmp(row: &[f64], a: usize, b: usize) -> Ordering {
    row[a].total_cmp(&row[b]).then(a.cmp(&b))
}

/// Every index sorted by distance from `i`, ties broken by smaller index first.
pub fn neighbor_order(dm: &DistanceMatrix, i: usize) -> Vec<usize> {
    assert!(i < dm.n(), "index {i} out of range for {} points", dm.n());
    let row = dm.row(i);
    let mut order: Vec<usize> = (0..dm.n()).collect();
    order.sort_unstable_by(|&a, &b| rank_cmp(row, a, b));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::StimulusId;

    fn st(t: &[f64]) -> ResponsePoint {
        ResponsePoint::SpikeTrain(t.to_vec())
    }

    fn vec_dataset(xs: &[f64]) -> LabeledDataset {
        LabeledDataset::new(
            xs.iter().map(|&x| ResponsePoint::Vector(vec![x])).collect(),
            vec![StimulusId(0); xs.len()],
        )
        .unwrap()
    }

    #[test]
    fn euclidean_pythagoras() {
        let a = ResponsePoint::Vector(vec![0.0, 0.0]);
        let b = ResponsePoint::Vector(vec![3.0, 4.0]);
        assert_eq!(distance(&a, &b, &MetricSpec::Euclidean).unwrap(), 5.0);
    }

    /// Exhaustive edit-path search: every spike of `a` is either deleted or
    /// matched to a distinct spike of `b` (shift), remaining spikes of `b` inserted.
    fn vp_bruteforce(a: &[f64], b: &[f64], q: f64) -> f64 {
        fn go(a: &[f64], b: &[f64], used: &mut Vec<bool>, q: f64) -> f64 {
            match a.split_first() {
                None => used.iter().filter(|u| !**u).count() as f64,
                Some((&t, rest)) => {
                    let mut best = 1.0 + go(rest, b, used, q);
                    for j in 0..b.len() {
                        if !used[j] {
                            used[j] = true;
                            best = best.min(q * (t - b[j]).abs() + go(rest, b, used, q));
                            used[j] = false;
                        }
                    }
                    best
                }
            }
        }
        go(a, b, &mut vec![false; b.len()], q)
    }

    #[test]
    fn victor_purpura_examples() {
        let m = MetricSpec::VictorPurpura { q: 1.0 };
        let d = distance(&st(&[1.0]), &st(&[1.2]), &m).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
        assert!((vp_bruteforce(&[1.0], &[1.2], 1.0) - 0.2).abs() < 1e-12);
        // shifting is dearer than delete+insert
        assert_eq!(victor_purpura(&[0.0], &[5.0], 1.0), 2.0);
        assert_eq!(victor_purpura(&[], &[1.0, 2.0], 3.0), 2.0);
    }

    #[test]
    fn victor_purpura_matches_bruteforce() {
        let trains: [&[f64]; 6] = [
            &[],
            &[0.1],
            &[0.1, 0.5],
            &[0.2, 0.3, 0.9],
            &[0.05, 0.6, 0.61],
            &[1.5, 2.0],
        ];
        for q in [0.0, 0.5, 1.0, 3.0, 20.0] {
            for a in trains {
                for b in trains {
                    let dp = victor_purpura(a, b, q);
                    let bf = vp_bruteforce(a, b, q);
                    assert!((dp - bf).abs() < 1e-12, "q={q} {a:?} {b:?}: {dp} vs {bf}");
                }
            }
        }
    }

    #[test]
    fn van_rossum_closed_form() {
        let m = MetricSpec::VanRossum { tau: 1.0 };
        let d = distance(&st(&[0.3]), &st(&[1.3]), &m).unwrap();
        assert!((d - (1.0 - (-1.0f64).exp()).sqrt()).abs() < 1e-12);
        assert!((d - 0.795_060_1).abs() < 1e-7);
        assert_eq!(distance(&st(&[0.1, 0.4]), &st(&[0.1, 0.4]), &m).unwrap(), 0.0);
    }

    /// Riemann-sum oracle for the van Rossum integral.
    #[test]
    fn van_rossum_matches_numerical_integral() {
        let (a, b, tau) = ([0.1, 0.35, 0.4], [0.2, 0.8], 0.25);
        let f = |t: f64, s: &[f64]| -> f64 {
            s.iter().filter(|&&ti| t >= ti).map(|&ti| (-(t - ti) / tau).exp()).sum()
        };
        let dt = 1e-5;
        let mut acc = 0.0;
        let mut t = 0.0;
        while t < 8.0 {
            let mid = t + 0.5 * dt;
            let diff = f(mid, &a) - f(mid, &b);
            acc += diff * diff * dt;
            t += dt;
        }
        let oracle = (acc / tau).sqrt();
        assert!((van_rossum(&a, &b, tau) - oracle).abs() < 1e-4);
    }

    #[test]
    fn metric_mismatch() {
        let v = ResponsePoint::Vector(vec![0.0]);
        let s = st(&[0.0]);
        assert!(matches!(
            distance(&v, &v, &MetricSpec::VanRossum { tau: 1.0 }),
            Err(Error::MetricMismatch { .. })
        ));
        assert!(matches!(
            distance(&s, &s, &MetricSpec::Euclidean),
            Err(Error::MetricMismatch { .. })
        ));
        assert!(distance(&v, &s, &MetricSpec::Euclidean).is_err());
        assert!(MetricSpec::VanRossum { tau: 0.0 }.validate().is_err());
        assert!(MetricSpec::VictorPurpura { q: -1.0 }.validate().is_err());
    }

    #[test]
    fn matrix_small_cases() {
        let dm = distance_matrix(&vec_dataset(&[4.0]), &MetricSpec::Euclidean).unwrap();
        assert_eq!(dm.n(), 1);
        assert_eq!(dm.get(0, 0), 0.0);

        let dm = distance_matrix(&vec_dataset(&[0.0, 1.0, 3.0]), &MetricSpec::Euclidean).unwrap();
        assert_eq!(dm.get(0, 1), 1.0);
        assert_eq!(dm.get(0, 2), 3.0);
        assert_eq!(dm.get(1, 2), 2.0);
        for i in 0..3 {
            assert_eq!(dm.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(dm.get(i, j), dm.get(j, i));
            }
        }
    }

    #[test]
    fn neighbor_order_ties() {
        // distances from 0: self 0, 1 -> 2.0, 2 -> 1.0
        let dm = DistanceMatrix::from_entries(3, vec![0.0, 2.0, 1.0, 2.0, 0.0, 1.5, 1.0, 1.5, 0.0])
            .unwrap();
        assert_eq!(neighbor_order(&dm, 0), vec![0, 2, 1]);

        let dm = distance_matrix(&vec_dataset(&[0.0, 1.0, -1.0]), &MetricSpec::Euclidean).unwrap();
        assert_eq!(neighbor_order(&dm, 0), vec![0, 1, 2]);

        // duplicate of point 2 at index 0
        let dm = distance_matrix(&vec_dataset(&[5.0, 1.0, 5.0]), &MetricSpec::Euclidean).unwrap();
        assert_eq!(neighbor_order(&dm, 2), vec![0, 2, 1]);
    }

    #[test]
    fn csv_output() {
        let dm = distance_matrix(&vec_dataset(&[0.0, 0.5]), &MetricSpec::Euclidean).unwrap();
        let mut buf = Vec::new();
        dm.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "0.0000000000000000e0,5.0000000000000000e-1\n5.0000000000000000e-1,0.0000000000000000e0\n"
        );
    }
}
