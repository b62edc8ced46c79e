//! Command-line front end: toy data generation, distance matrices, estimation
//! and the toy benchmark.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spikemi::bias::{bias_corrected, default_lambdas, CurveOptions, CurvePoint, DEFAULT_REPEATS};
use spikemi::data::{load_dataset, write_dataset, DataFormat, LabeledDataset};
use spikemi::estimators::{
    ConfigEcho, Estimator, EstimatorKind, HistogramConfig, KernelConfig, KsgConfig, SelfNeighbor, TieRule,
};
use spikemi::metrics::{distance_matrix, MetricSpec};
use spikemi::toybench::{
    generate_toy, run_benchmark, write_outputs, BenchmarkConfig, Protocol, Sigma2, ToySpec, DEFAULT_MC_SAMPLES,
};
use spikemi::{Error, Result};

#[derive(Parser)]
#[command(name = "spikemi", version, about = "Mutual information for spike trains and other metric-space responses")]
struct Cli {
    /// Worker threads (default: all available cores). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a toy dataset: Gaussian clouds around random sources in a unit box.
    GenToy(GenToyArgs),
    /// Write the pairwise distance matrix of a dataset as CSV.
    Distances(DistancesArgs),
    /// Estimate the mutual information between stimulus and response, in bits.
    Estimate(EstimateArgs),
    /// Compare the kernel and histogram estimators on toy data with known information.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct GenToyArgs {
    /// Number of stimuli (sources).
    #[arg(long)]
    ns: usize,
    /// Response dimension.
    #[arg(long)]
    nd: usize,
    /// Trials per stimulus.
    #[arg(long)]
    nt: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise variance per component; drawn uniformly from [0, 1) when omitted.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Output file (csv-vectors); stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Dataset file.
    #[arg(long)]
    input: PathBuf,
    /// csv-vectors (`label,x0,x1,...`) or spike-text (`label k t1 ... tk`).
    #[arg(long, default_value = "csv-vectors")]
    format: DataFormat,
    /// Defaults to euclidean for vectors; required for spike trains.
    #[arg(long, value_enum)]
    metric: Option<MetricName>,
    /// Victor-Purpura cost per unit of spike shift.
    #[arg(long)]
    q: Option<f64>,
    /// van Rossum kernel time constant.
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricName {
    Euclidean,
    VictorPurpura,
    VanRossum,
}

#[derive(Args)]
struct DistancesArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output CSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("method").args(["kernel", "ksg", "histogram"])))]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Kernel estimator (the default).
    #[arg(long)]
    kernel: bool,
    /// Digamma nearest-neighbour estimator.
    #[arg(long)]
    ksg: bool,
    /// Plug-in histogram estimator.
    #[arg(long)]
    histogram: bool,

    /// Kernel size in points (default: trials per stimulus).
    #[arg(long, conflicts_with = "h_frac")]
    nh: Option<usize>,
    /// Kernel size as a fraction of all responses.
    #[arg(long)]
    h_frac: Option<f64>,

    /// Same-stimulus neighbour order (default: trials per stimulus / stimuli, at least 1).
    #[arg(long)]
    nk: Option<usize>,
    /// Count the centre as its own first same-stimulus neighbour.
    #[arg(long)]
    ksg_include_self: bool,
    /// Count every point within the threshold distance, ties included.
    #[arg(long)]
    ksg_distance_ties: bool,

    /// Histogram bin width (required with --histogram).
    #[arg(long)]
    bin_width: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    bin_origin: f64,

    /// Extrapolate subsample estimates to remove finite-sample bias.
    #[arg(long)]
    bias_correct: bool,
    /// Subsample fractions (default 0.1, 0.2, ..., 1.0, minus those keeping fewer than 2 trials).
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Subsamples per fraction below one.
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output JSON file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long, default_value_t = 10)]
    ns: usize,
    #[arg(long, default_value_t = 3)]
    nd: usize,
    #[arg(long, default_value_t = 10)]
    nt: usize,
    #[arg(long, default_value_t = 50)]
    datasets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for records.csv, summary.json and the scatter files.
    #[arg(short, long)]
    output: PathBuf,
    /// Keep the first datasets drawn instead of spreading the true information evenly.
    #[arg(long)]
    no_prune: bool,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    mc_samples: usize,
    /// Histogram widths to sweep.
    #[arg(long, value_delimiter = ',')]
    hist_widths: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
}

#[derive(Serialize)]
struct CorrectedOutput<'a> {
    estimator: EstimatorKind,
    config: ConfigEcho,
    bits: f64,
    curve: &'a [CurvePoint],
    intercept_bits: f64,
    #[serde(rename = "A_bits")]
    a_bits: f64,
    #[serde(rename = "B_bits")]
    b_bits: f64,
    residual: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spikemi: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidParameter("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::GenToy(a) => gen_toy(a),
        Command::Distances(a) => distances(a),
        Command::Estimate(a) => estimate(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

/// Run `f` on a buffered writer for `path`, or stdout.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let shown = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let wrap = |e| Error::Io {
        path: shown.clone(),
        source: e,
    };
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(wrap)?);
            f(&mut w).and_then(|_| w.flush()).map_err(wrap)
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w).and_then(|_| w.flush()).map_err(wrap)
        }
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serialisable output");
    with_output(path, |w| writeln!(w, "{text}"))
}

fn gen_toy(a: GenToyArgs) -> Result<()> {
    let spec = ToySpec {
        n_s: a.ns,
        n_d: a.nd,
        n_t: a.nt,
        sigma2: a.sigma2.map_or(Sigma2::Uniform, Sigma2::Fixed),
        seed: a.seed,
    };
    let toy = generate_toy(&spec)?;
    with_output(a.output.as_deref(), |w| write_dataset(&toy.data, DataFormat::CsvVectors, w))
}

fn load_with_metric(a: &InputArgs) -> Result<(LabeledDataset, MetricSpec)> {
    let d = load_dataset(&a.input, a.format)?;
    let name = match a.metric {
        Some(m) => m,
        None if d.is_vector() => MetricName::Euclidean,
        None => {
            return Err(Error::InvalidParameter(
                "--metric is required for spike-train data (victor-purpura or van-rossum)".into(),
            ))
        }
    };
    let metric = match name {
        MetricName::Euclidean => MetricSpec::Euclidean,
        MetricName::VictorPurpura => MetricSpec::VictorPurpura {
            q: a.q.ok_or_else(|| Error::InvalidParameter("--q is required with --metric victor-purpura".into()))?,
        },
        MetricName::VanRossum => MetricSpec::VanRossum {
            tau: a.tau.ok_or_else(|| Error::InvalidParameter("--tau is required with --metric van-rossum".into()))?,
        },
    };
    Ok((d, metric))
}

fn distances(a: DistancesArgs) -> Result<()> {
    let (d, metric) = load_with_metric(&a.input)?;
    let dm = distance_matrix(&d, &metric)?;
    with_output(a.output.as_deref(), |w| dm.write_csv(w))
}

fn estimator_for(a: &EstimateArgs, d: &LabeledDataset) -> Result<Estimator> {
    if a.ksg {
        let n_k = a.nk.unwrap_or((d.n_t() / d.n_s()).max(1));
        return Ok(Estimator::Ksg(KsgConfig {
            n_k,
            self_neighbor: if a.ksg_include_self {
                SelfNeighbor::Included
            } else {
                SelfNeighbor::Excluded
            },
            ties: if a.ksg_distance_ties { TieRule::Distance } else { TieRule::Rank },
        }));
    }
    if a.histogram {
        let width = a
            .bin_width
            .ok_or_else(|| Error::InvalidParameter("--bin-width is required with --histogram".into()))?;
        return Ok(Estimator::Histogram(HistogramConfig {
            width,
            origin: a.bin_origin,
        }));
    }
    Ok(Estimator::Kernel(match (a.nh, a.h_frac) {
        (Some(n), _) => KernelConfig::with_count(n),
        (None, Some(h)) => KernelConfig::with_fraction(h),
        (None, None) => KernelConfig::default(),
    }))
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let (d, metric) = load_with_metric(&a.input)?;
    let est = estimator_for(&a, &d)?;
    let dm = if est.needs_distances() {
        Some(distance_matrix(&d, &metric)?)
    } else {
        None
    };
    let out = a.output.as_deref();

    if !a.bias_correct {
        return write_json(out, &est.estimate(&d, dm.as_ref())?);
    }
    let mut opts = CurveOptions {
        lambdas: a.lambdas.clone().unwrap_or_else(default_lambdas),
        repeats: a.repeats,
        seed: a.seed,
    };
    if a.lambdas.is_none() {
        opts = opts.usable_for(d.n_t(), 2);
    }
    let r = bias_corrected(&d, dm.as_ref(), &est, &opts)?;
    write_json(
        out,
        &CorrectedOutput {
            estimator: r.raw.estimator,
            config: r.raw.config,
            bits: r.raw.bits,
            curve: &r.curve,
            intercept_bits: r.fit.intercept_bits,
            a_bits: r.fit.a_bits,
            b_bits: r.fit.b_bits,
            residual: r.fit.residual,
        },
    )
}

fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let protocol = Protocol {
        prune: !a.no_prune,
        mc_samples: a.mc_samples,
        ..Protocol::new(a.ns, a.nd, a.nt, a.datasets)
    };
    let mut cfg = BenchmarkConfig {
        repeats: a.repeats,
        ..BenchmarkConfig::default()
    };
    if let Some(w) = a.hist_widths {
        cfg.hist_widths = w;
    }
    let result = run_benchmark(&protocol, &cfg, a.seed)?;
    write_outputs(&result, &a.output)?;
    write_json(None, &result.summary)
}
