//! Stimulus/response datasets and their text formats.
//!
//! A [`LabeledDataset`] is a balanced design: `n_s` stimuli, each presented for
//! exactly `n_t` trials, giving `n_r = n_s * n_t` responses. Response `i` is the
//! `i`-th record of the file it was loaded from, and every tie-break in the
//! crate refers to that index.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng;

/// Index of a stimulus in `[0, n_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StimulusId(pub usize);

impl StimulusId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A single response: a point in R^n_d or a spike train (times in seconds).
#[derive(Debug, Clone, PartialEq)]
pub enum ResponsePoint {
    Vector(Vec<f64>),
    SpikeTrain(Vec<f64>),
}

impl ResponsePoint {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ResponsePoint::Vector(_) => "vector",
            ResponsePoint::SpikeTrain(_) => "spike-train",
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            ResponsePoint::Vector(v) => {
                if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                    return Err(format!("non-finite coordinate {x}"));
                }
            }
            ResponsePoint::SpikeTrain(t) => {
                if let Some(x) = t.iter().find(|x| !x.is_finite()) {
                    return Err(format!("non-finite spike time {x}"));
                }
                if t.windows(2).any(|w| w[1] < w[0]) {
                    return Err("spike times must be in ascending order".into());
                }
            }
        }
        Ok(())
    }
}

/// On-disk dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// `label,x0,x1,...` one response per line.
    CsvVectors,
    /// `label k t1 ... tk` one spike train per line.
    SpikeText,
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv-vectors" => Ok(DataFormat::CsvVectors),
            "spike-text" => Ok(DataFormat::SpikeText),
            other => Err(format!(
                "unknown format '{other}' (expected csv-vectors or spike-text)"
            )),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::CsvVectors => "csv-vectors",
            DataFormat::SpikeText => "spike-text",
        })
    }
}

/// Format a real with 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Balanced stimulus/response dataset. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Vec<ResponsePoint>,
    labels: Vec<StimulusId>,
    n_s: usize,
    n_t: usize,
    by_stimulus: Vec<Vec<usize>>,
}

impl LabeledDataset {
    /// Build a dataset, checking the balanced-design and same-variant invariants.
    pub fn new(points: Vec<ResponsePoint>, labels: Vec<StimulusId>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::Empty);
        }
        for p in &points {
            p.validate().map_err(Error::InvalidParameter)?;
        }
        check_same_variant(&points)?;

        let n_s = labels.iter().map(|l| l.0).max().unwrap_or(0) + 1;
        let mut by_stimulus = vec![Vec::new(); n_s];
        for (i, l) in labels.iter().enumerate() {
            by_stimulus[l.0].push(i);
        }
        if let Some(missing) = by_stimulus.iter().position(|v| v.is_empty()) {
            return Err(Error::MissingStimulus { missing, n_s });
        }
        // The offending stimulus is the first one disagreeing with the most common trial count.
        let n_t = majority_len(&by_stimulus);
        if let Some(stimulus) = by_stimulus.iter().position(|v| v.len() != n_t) {
            return Err(Error::Unbalanced {
                stimulus,
                found: by_stimulus[stimulus].len(),
                expected: n_t,
            });
        }

        Ok(LabeledDataset {
            points,
            labels,
            n_s,
            n_t,
            by_stimulus,
        })
    }

    pub fn points(&self) -> &[ResponsePoint] {
        &self.points
    }

    pub fn labels(&self) -> &[StimulusId] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> StimulusId {
        self.labels[i]
    }

    /// Number of stimuli.
    pub fn n_s(&self) -> usize {
        self.n_s
    }

    /// Trials per stimulus.
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Total number of responses.
    pub fn n_r(&self) -> usize {
        self.points.len()
    }

    /// Response indices evoked by `stimulus`, in file order.
    pub fn trials_of(&self, stimulus: StimulusId) -> &[usize] {
        &self.by_stimulus[stimulus.0]
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.points[0], ResponsePoint::Vector(_))
    }

    /// Dimension of vector responses, `None` for spike trains.
    pub fn dim(&self) -> Option<usize> {
        match &self.points[0] {
            ResponsePoint::Vector(v) => Some(v.len()),
            ResponsePoint::SpikeTrain(_) => None,
        }
    }

    /// The responses at `indices` (kept in the given order) as a new dataset.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset::new(points, labels)
    }

    /// Same responses with new labels; the result must still be balanced.
    pub fn with_labels(&self, labels: Vec<StimulusId>) -> Result<Self> {
        LabeledDataset::new(self.points.clone(), labels)
    }
}

fn majority_len(groups: &[Vec<usize>]) -> usize {
    // Most common group size; ties go to the larger size.
    let mut counts = std::collections::BTreeMap::new();
    for g in groups {
        *counts.entry(g.len()).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(len, c)| (c, len))
        .map(|(len, _)| len)
        .unwrap_or(0)
}

fn check_same_variant(points: &[ResponsePoint]) -> Result<()> {
    let first = &points[0];
    for (i, p) in points.iter().enumerate().skip(1) {
        match (first, p) {
            (ResponsePoint::Vector(a), ResponsePoint::Vector(b)) if a.len() != b.len() => {
                return Err(Error::MixedVariant(format!(
                    "response {i} has dimension {} but response 0 has dimension {}",
                    b.len(),
                    a.len()
                )));
            }
            (ResponsePoint::Vector(_), ResponsePoint::Vector(_))
            | (ResponsePoint::SpikeTrain(_), ResponsePoint::SpikeTrain(_)) => {}
            _ => {
                return Err(Error::MixedVariant(format!(
                    "response {i} is a {} but response 0 is a {}",
                    p.variant_name(),
                    first.variant_name()
                )));
            }
        }
    }
    Ok(())
}

/// Read a dataset from `path`.
pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, format, path)
}

/// Parse dataset text. `origin` is only used in error messages.
pub fn parse_dataset(text: &str, format: DataFormat, origin: &Path) -> Result<LabeledDataset> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: PathBuf::from(origin),
            line: lineno + 1,
            message,
        };
        let (label, point) = match format {
            DataFormat::CsvVectors => parse_csv_line(line),
            DataFormat::SpikeText => parse_spike_line(line),
        }
        .map_err(parse_err)?;
        point
            .validate()
            .map_err(|m| Error::Parse {
                path: PathBuf::from(origin),
                line: lineno + 1,
                message: m,
            })?;
        labels.push(StimulusId(label));
        points.push(point);
    }
    LabeledDataset::new(points, labels)
}

fn parse_label(tok: &str) -> std::result::Result<usize, String> {
    tok.trim()
        .parse::<usize>()
        .map_err(|_| format!("label '{}' is not a nonnegative integer", tok.trim()))
}

fn parse_real(tok: &str) -> std::result::Result<f64, String> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| format!("'{}' is not a real number", tok.trim()))
}

fn parse_csv_line(line: &str) -> std::result::Result<(usize, ResponsePoint), String> {
    let mut fields = line.split(',');
    let label = parse_label(fields.next().unwrap_or(""))?;
    let coords = fields.map(parse_real).collect::<std::result::Result<Vec<_>, _>>()?;
    if coords.is_empty() {
        return Err("expected at least one coordinate after the label".into());
    }
    Ok((label, ResponsePoint::Vector(coords)))
}

fn parse_spike_line(line: &str) -> std::result::Result<(usize, ResponsePoint), String> {
    let mut fields = line.split_whitespace();
    let label = parse_label(fields.next().unwrap_or(""))?;
    let k = fields
        .next()
        .ok_or("missing spike count")?
        .parse::<usize>()
        .map_err(|_| "spike count is not a nonnegative integer".to_string())?;
    let times = fields.map(parse_real).collect::<std::result::Result<Vec<_>, _>>()?;
    if times.len() != k {
        return Err(format!("spike count says {k} but {} times follow", times.len()));
    }
    Ok((label, ResponsePoint::SpikeTrain(times)))
}

/// Serialize a dataset in `format`.
pub fn write_dataset<W: Write>(d: &LabeledDataset, format: DataFormat, mut out: W) -> std::io::Result<()> {
    for (p, l) in d.points.iter().zip(&d.labels) {
        match (format, p) {
            (DataFormat::CsvVectors, ResponsePoint::Vector(v)) => {
                write!(out, "{}", l.0)?;
                for x in v {
                    write!(out, ",{}", format_real(*x))?;
                }
            }
            (DataFormat::SpikeText, ResponsePoint::SpikeTrain(t)) => {
                write!(out, "{} {}", l.0, t.len())?;
                for x in t {
                    write!(out, " {}", format_real(*x))?;
                }
            }
            _ => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("cannot write {} responses as {format}", p.variant_name()),
                ))
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Write a dataset to `path`.
pub fn save_dataset(d: &LabeledDataset, path: impl AsRef<Path>, format: DataFormat) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_dataset(d, format, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Trials kept per stimulus when subsampling a fraction `lambda` of `n_t`.
///
/// This is `floor(lambda * n_t)`; a 1e-9 guard absorbs representation error in
/// grid values such as `0.7`.
pub fn trials_for_fraction(lambda: f64, n_t: usize) -> usize {
    (lambda * n_t as f64 + 1e-9).floor() as usize
}

/// Indices (ascending) of a stratified subsample keeping `floor(lambda * n_t)`
/// trials of every stimulus, drawn uniformly without replacement.
pub fn subsample_indices(d: &LabeledDataset, lambda: f64, seed: u64) -> Result<Vec<usize>> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!("subsample fraction {lambda} not in (0, 1]")));
    }
    let keep = trials_for_fraction(lambda, d.n_t);
    if keep == 0 {
        return Err(Error::invalid(format!(
            "subsample fraction {lambda} keeps no trials out of {}",
            d.n_t
        )));
    }
    if keep >= d.n_t {
        return Ok((0..d.n_r()).collect());
    }
    let mut rng = rng::stream(seed, &[rng::purpose::SUBSAMPLE]);
    let mut out = Vec::with_capacity(keep * d.n_s);
    for trials in &d.by_stimulus {
        let picked = rand::seq::index::sample(&mut rng, trials.len(), keep);
        out.extend(picked.into_iter().map(|k| trials[k]));
    }
    out.sort_unstable();
    Ok(out)
}

/// Stratified subsample; see [`subsample_indices`]. `lambda = 1` returns the dataset unchanged.
pub fn subsample(d: &LabeledDataset, lambda: f64, seed: u64) -> Result<LabeledDataset> {
    let idx = subsample_indices(d, lambda, seed)?;
    if idx.len() == d.n_r() {
        return Ok(d.clone());
    }
    d.select(&idx)
}
