//! `hds`: generate HDS or Sobol sequences, measure discrepancy, run single
//! DE trials and the paired HDS vs Sobol benchmark.
//!
//! Machine-readable output goes to stdout or the requested files; the
//! resolved configuration (`#config {...}`) and progress messages go to
//! stderr. Exit codes: 0 success, 2 usage or configuration error, 3 state
//! error (for example resuming a benchmark with a different configuration).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hds::bench::experiment::{read_records, run_experiment_in, run_trial, RECORDS_FILE};
use hds::bench::stats::format_table;
use hds::bench::{summarize, BenchmarkFunction, ExperimentConfig, FunctionId};
use hds::de::InitMethod;
use hds::io::{read_samples, write_csv, write_json, Format};
use hds::numerics::SobolEngine;
use hds::sampler::{
    denormalize, hds_generate_detailed, normalize, Bounds, GaussianWeightSpec, HdsConfig,
};
use hds::{DiscrepancyReport, Frame, HdsError, Metric, SampleMatrix};

const EXIT_CONFIG: u8 = 2;
const EXIT_STATE: u8 = 3;
const SUMMARY_FILE: &str = "summary.json";

#[derive(Parser)]
#[command(
    name = "hds",
    version,
    about = "Hyperellipsoid density sampling and the HDS vs Sobol benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an HDS or Sobol sequence.
    Sample(SampleArgs),
    /// Compute discrepancy metrics of a sample file (JSON lines on stdout).
    Discrepancy(DiscrepancyArgs),
    /// Run one differential-evolution trial.
    Optimize(OptimizeArgs),
    /// Run the paired HDS vs Sobol experiment and summarize it.
    Bench(BenchArgs),
    /// Print the comparison table for a records file.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hds,
    Sobol,
}

impl From<MethodArg> for InitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Hds => InitMethod::Hds,
            MethodArg::Sobol => InitMethod::Sobol,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    L2Star,
    CenteredL2,
    All,
}

#[derive(Args)]
struct BoundsArgs {
    /// Bounds `lo,hi` applied to every dimension.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "bounds_file")]
    bounds: Option<String>,
    /// File with one `lo,hi` line per dimension.
    #[arg(long)]
    bounds_file: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value = "hds")]
    method: MethodArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    dims: usize,
    #[command(flatten)]
    bounds: BoundsArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian weight means, one per dimension, in bounds coordinates.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "weights_std"
    )]
    weights_mean: Option<Vec<f64>>,
    /// Gaussian weight standard deviations, one per dimension.
    #[arg(long, value_delimiter = ',', requires = "weights_mean")]
    weights_std: Option<Vec<f64>>,
    /// Fix the number of ellipsoids instead of choosing it from the dendrogram.
    #[arg(long)]
    ellipsoids: Option<usize>,
    /// Number of initial k-means centroids.
    #[arg(long)]
    k_init: Option<usize>,
    /// Sobol only: number of leading points to drop (1 removes the origin).
    #[arg(long, default_value_t = 0)]
    skip: u64,
    /// Emit points in the unit cube instead of the bounds.
    #[arg(long)]
    normalize: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the output extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct DiscrepancyArgs {
    /// CSV or JSON sample file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    metric: MetricArg,
    /// Bounds used to map the points into the unit cube first.
    #[command(flatten)]
    bounds: BoundsArgs,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 10)]
    dims: usize,
    /// Population size.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, value_enum, default_value = "hds")]
    method: MethodArg,
    /// Trial index; the seed is `seed + trial`.
    #[arg(long, default_value_t = 0)]
    trial: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated function names; the shifted suite when omitted.
    #[arg(long, value_delimiter = ',')]
    functions: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_value = "10,30")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "64,1000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 15)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    out_dir: PathBuf,
    /// Keep completed records from a previous run with the same configuration.
    #[arg(long)]
    resume: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    bootstrap_seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Records CSV, or a bench output directory.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value_t = 0)]
    bootstrap_seed: u64,
    /// Print the summaries as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Discrepancy(a) => cmd_discrepancy(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                HdsError::State(_) => EXIT_STATE,
                _ => EXIT_CONFIG,
            })
        }
    }
}

fn echo_config(value: serde_json::Value) {
    eprintln!("#config {value}");
}

fn parse_pair(text: &str, what: &str) -> hds::Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| HdsError::Config(format!("invalid {what} value '{s}'")))
    };
    match parts.as_slice() {
        [lo, hi] => Ok((parse(lo)?, parse(hi)?)),
        _ => Err(HdsError::Config(format!(
            "{what} must be 'lo,hi', got '{text}'"
        ))),
    }
}

fn resolve_bounds(args: &BoundsArgs, dims: usize) -> hds::Result<Bounds> {
    if let Some(path) = &args.bounds_file {
        let text = fs::read_to_string(path).map_err(|e| {
            HdsError::Config(format!("cannot read bounds file {}: {e}", path.display()))
        })?;
        let (mut lower, mut upper) = (Vec::new(), Vec::new());
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (lo, hi) = parse_pair(line, "bounds")?;
            lower.push(lo);
            upper.push(hi);
        }
        if lower.len() != dims {
            return Err(HdsError::Config(format!(
                "bounds file has {} dimensions but --dims is {dims}",
                lower.len()
            )));
        }
        return Bounds::new(lower, upper);
    }
    let (lo, hi) = match &args.bounds {
        Some(text) => parse_pair(text, "bounds")?,
        None => (0.0, 1.0),
    };
    Bounds::uniform(dims, lo, hi)
}

fn cmd_sample(a: SampleArgs) -> hds::Result<()> {
    if a.n == 0 || a.dims == 0 {
        return Err(HdsError::Config("--n and --dims must be at least 1".into()));
    }
    let bounds = resolve_bounds(&a.bounds, a.dims)?;
    let weights = match (a.weights_mean, a.weights_std) {
        (Some(m), Some(s)) => {
            if m.len() != a.dims || s.len() != a.dims {
                return Err(HdsError::Config(format!(
                    "weight vectors must have {} entries, got {} means and {} stddevs",
                    a.dims,
                    m.len(),
                    s.len()
                )));
            }
            Some(GaussianWeightSpec::new(m, s)?)
        }
        _ => None,
    };
    let format = match (a.format, &a.out) {
        (Some(FormatArg::Json), _) => Format::Json,
        (Some(FormatArg::Csv), _) => Format::Csv,
        (None, Some(p)) => Format::from_path(p),
        (None, None) => Format::Csv,
    };
    let method = InitMethod::from(a.method);
    let mut config = HdsConfig::new(a.n, bounds.clone())
        .with_seed(a.seed)
        .with_normalize(a.normalize);
    config.weights = weights;
    config.n_ellipsoids = a.ellipsoids;
    config.k_init = a.k_init;
    echo_config(json!({
        "command": "sample",
        "method": method,
        "skip": a.skip,
        "format": if format == Format::Json { "json" } else { "csv" },
        "out": a.out,
        "hds": &config,
    }));

    let samples = match method {
        InitMethod::Hds => {
            let out = hds_generate_detailed(&config)?;
            eprintln!(
                "generated {} points from {} ellipsoids ({} void-filled)",
                out.samples.nrows(),
                out.n_ellipsoids(),
                out.filled
            );
            out.samples
        }
        InitMethod::Sobol => {
            let mut engine = SobolEngine::new(a.dims)?;
            engine.skip(a.skip)?;
            let unit = engine.points(a.n)?;
            if a.normalize {
                unit
            } else {
                denormalize(&unit, &bounds)?
            }
        }
    };
    write_output(&samples, format, a.out.as_deref())
}

fn write_output(samples: &SampleMatrix, format: Format, out: Option<&Path>) -> hds::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    match format {
        Format::Csv => write_csv(samples, &mut w)?,
        Format::Json => {
            write_json(samples, &mut w)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_discrepancy(a: DiscrepancyArgs) -> hds::Result<()> {
    let points = read_samples(&a.input, Frame::Unit)?;
    let points = if a.bounds.bounds.is_some() || a.bounds.bounds_file.is_some() {
        normalize(&points, &resolve_bounds(&a.bounds, points.ncols())?)?
    } else {
        points
    };
    let metrics = match a.metric {
        MetricArg::L2Star => vec![Metric::L2Star],
        MetricArg::CenteredL2 => vec![Metric::CenteredL2],
        MetricArg::All => vec![Metric::L2Star, Metric::CenteredL2],
    };
    echo_config(json!({
        "command": "discrepancy",
        "input": a.input,
        "metrics": metrics,
        "n": points.nrows(),
        "dims": points.ncols(),
    }));
    let mut out = io::stdout().lock();
    for m in metrics {
        writeln!(
            out,
            "{}",
            DiscrepancyReport::compute(m, &points)?.to_json_line()
        )?;
    }
    Ok(())
}

fn cmd_optimize(a: OptimizeArgs) -> hds::Result<()> {
    let function: FunctionId = a.function.parse()?;
    let config = ExperimentConfig {
        functions: vec![function],
        dims: vec![a.dims],
        sizes: vec![a.n],
        trials: (a.trial + 1).max(2),
        base_seed: a.seed,
        max_iter: a.max_iter,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let method = InitMethod::from(a.method);
    echo_config(json!({
        "command": "optimize",
        "method": method,
        "trial": a.trial,
        "seed": config.trial_seed(a.trial),
        "experiment": &config,
    }));
    let f = BenchmarkFunction::new(function, a.dims)?;
    let record = run_trial(&f, method, a.n, a.trial, &config)?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> hds::Result<()> {
    let functions = match &a.functions {
        Some(names) => names
            .iter()
            .map(|s| s.parse())
            .collect::<hds::Result<Vec<FunctionId>>>()?,
        None => FunctionId::SHIFTED.to_vec(),
    };
    let config = ExperimentConfig {
        functions,
        dims: a.dims.clone(),
        sizes: a.sizes.clone(),
        trials: a.trials,
        base_seed: a.seed,
        max_iter: a.max_iter,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    echo_config(json!({
        "command": "bench",
        "out_dir": a.out_dir,
        "resume": a.resume,
        "workers": a.workers,
        "bootstrap_seed": a.bootstrap_seed,
        "config_hash": config.hash(),
        "experiment": &config,
    }));
    let records = run_experiment_in(&config, &a.out_dir, a.resume, a.workers)?;
    eprintln!(
        "{} records in {}",
        records.len(),
        a.out_dir.join(RECORDS_FILE).display()
    );
    let summaries = summarize(&records, a.bootstrap_seed)?;
    fs::write(
        a.out_dir.join(SUMMARY_FILE),
        serde_json::to_string_pretty(&summaries)? + "\n",
    )?;
    eprint!("{}", format_table(&summaries));
    Ok(())
}

fn cmd_report(a: ReportArgs) -> hds::Result<()> {
    let path = if a.records.is_dir() {
        a.records.join(RECORDS_FILE)
    } else {
        a.records.clone()
    };
    echo_config(json!({
        "command": "report",
        "records": path,
        "bootstrap_seed": a.bootstrap_seed,
        "json": a.json,
    }));
    let records = read_records(&path).map_err(|e| match e {
        HdsError::Io(e) => HdsError::Config(format!("cannot read {}: {e}", path.display())),
        e => e,
    })?;
    let summaries = summarize(&records, a.bootstrap_seed)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&summaries)?);
    } else {
        print!("{}", format_table(&summaries));
    }
    Ok(())
}
