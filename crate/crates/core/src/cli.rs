//! Command-line front end: `sample`, `count`, `tv` and `planar`.
//!
//! Output is JSONL, one record per draw, written in draw order. Records
//! never mention the worker count or wall time (unless `--timing` is set),
//! so the same invocation with the same seed is byte-identical.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{graph_digest, model_digest, parse_index_list, parse_partition, read_graph, read_matrix, read_model};
use crate::models::{Constraint, DppModel};
use crate::planar::{MatchingCounter, PlanarSampler};
use crate::rng::{derive_seed, tag};
use crate::samplers::{PreparedModel, RoundMeter, SampleResult, SamplerConfig, SamplerKind, Status};
use crate::validation::{brute_force_distribution, statistical_tolerance, tv_distance, ExactDistribution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pardpp", version, about = "Parallel DPP and planar matching samplers")]
pub struct Cli {
    /// Worker threads for sampling; never changes the output.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples and emit one JSON record per draw.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "auto", value_parser = parse_sampler)]
        sampler: SamplerKind,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Print the unnormalized count of sets containing `--given`.
    Count {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated 0-based indices.
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Total variation between a samples file and the exact distribution.
    Tv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        samples_file: PathBuf,
    },
    /// Count or sample perfect matchings of a planar graph.
    Planar {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = PlanarMode::Count)]
        mode: PlanarMode,
        #[arg(long, value_enum, default_value_t = PlanarMethod::Separator)]
        method: PlanarMethod,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model description JSON.
    #[arg(long, conflicts_with_all = ["matrix", "k", "partition"], required_unless_present = "matrix")]
    pub model: Option<PathBuf>,
    /// Ensemble matrix file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Cardinality constraint.
    #[arg(long, requires = "matrix", conflicts_with = "partition")]
    pub k: Option<usize>,
    /// Partition constraint, e.g. `0,1:1;2,3:1`.
    #[arg(long, requires = "matrix")]
    pub partition: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Add per-draw wall time to records (breaks byte-identical replay).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    /// Depth exponent of the EI batch size.
    #[arg(long)]
    pub c: Option<f64>,
    /// Ratio exponent of the EI threshold.
    #[arg(long = "ratio-exponent")]
    pub ratio_exponent: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "max-proposals")]
    pub max_proposals: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanarMode {
    Count,
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanarMethod {
    Separator,
    Sequential,
}

fn parse_sampler(s: &str) -> std::result::Result<SamplerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// One JSONL line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: serde_json::Value,
    pub index: u64,
    pub seed: u64,
    pub digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<Vec<(usize, usize)>>,
    pub meter: RoundMeter,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let workers = cli.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Sample { model, sampler, run, tuning } => cmd_sample(model, *sampler, run, tuning, workers),
        Command::Count { model, given } => cmd_count(model, given),
        Command::Tv { model, samples_file } => cmd_tv(model, samples_file),
        Command::Planar { graph, mode, method, run } => cmd_planar(graph, *mode, *method, run, workers),
    })
}

fn load_model(args: &ModelArgs) -> Result<DppModel> {
    if let Some(path) = &args.model {
        return read_model(path);
    }
    let path = args.matrix.as_ref().ok_or_else(|| Error::InvalidArgument("--model or --matrix is required".into()))?;
    let l = read_matrix(path)?;
    let constraint = match (&args.k, &args.partition) {
        (Some(k), _) => Constraint::Cardinality { k: *k },
        (None, Some(spec)) => parse_partition(spec)?,
        (None, None) => Constraint::None,
    };
    DppModel::new(l, constraint)
}

fn sampler_config(tuning: &TuningArgs, seed: u64, workers: usize) -> Result<SamplerConfig> {
    let d = SamplerConfig::default();
    let config = SamplerConfig {
        seed,
        eps: tuning.eps.unwrap_or(d.eps),
        depth_exponent: tuning.c.unwrap_or(d.depth_exponent),
        ratio_exponent: tuning.ratio_exponent.or(d.ratio_exponent),
        beta: tuning.beta.or(d.beta),
        delta: tuning.delta.unwrap_or(d.delta),
        max_proposals_per_round: tuning.max_proposals.unwrap_or(d.max_proposals_per_round),
        workers,
        ..d
    };
    config.validate()?;
    Ok(config)
}

fn open_out(out: &str) -> Result<Box<dyn Write>> {
    Ok(if out == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(out).map_err(|e| Error::Io(format!("{out}: {e}")))?))
    })
}

fn write_records(out: &str, records: &[RunRecord]) -> Result<()> {
    let mut w = open_out(out)?;
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `f` on every draw index, in parallel when more than one worker is
/// available; results come back in index order.
fn draw_all<T: Send>(n: u64, workers: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    if workers > 1 {
        (0..n).into_par_iter().map(&f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn cmd_sample(args: &ModelArgs, kind: SamplerKind, run: &RunArgs, tuning: &TuningArgs, workers: usize) -> Result<i32> {
    let model = load_model(args)?;
    let prepared = PreparedModel::new(model)?;
    let base = sampler_config(tuning, run.seed, workers)?;
    let resolved = prepared.resolve(kind)?;
    let digest = model_digest(prepared.model());
    let command = serde_json::json!({
        "name": "sample",
        "sampler": kind.name(),
        "resolved": resolved.name(),
        "master_seed": run.seed,
        "samples": run.samples,
        "eps": base.eps,
        "c": base.depth_exponent,
        "ratio_exponent": base.ratio_exponent(),
        "beta": base.beta,
        "delta": base.delta,
        "max_proposals": base.max_proposals_per_round,
    });
    let records = draw_all(run.samples, workers, |i| {
        let seed = derive_seed(run.seed, &[tag::SAMPLE, i]);
        let start = Instant::now();
        let result: SampleResult = prepared.sample(resolved, &SamplerConfig { seed, ..base.clone() })?;
        Ok(RunRecord {
            command: command.clone(),
            index: i,
            seed,
            digest: digest.clone(),
            sample: Some(result.sample),
            matching: None,
            meter: result.meter,
            status: result.status,
            wall_time_ms: run.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        })
    })?;
    write_records(&run.out, &records)?;
    Ok(if records.iter().any(|r| r.status.is_failed()) { EXIT_RUNTIME } else { EXIT_OK })
}

fn cmd_count(args: &ModelArgs, given: &str) -> Result<i32> {
    let model = load_model(args)?;
    let given = parse_index_list(given)?;
    println!("{}", format_significant(model.count(&given)?, 12));
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TvReport {
    tv: f64,
    samples: usize,
    failures: usize,
    support: usize,
    tolerance: f64,
    within_tolerance: bool,
}

fn cmd_tv(args: &ModelArgs, path: &PathBuf) -> Result<i32> {
    let model = load_model(args)?;
    let exact = brute_force_distribution(&model)?;
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut draws: Vec<Option<Vec<usize>>> = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        let sample = record.sample.ok_or_else(|| Error::Parse(format!("line {} has no sample", lineno + 1)))?;
        draws.push((!record.status.is_failed()).then_some(sample));
    }
    if draws.is_empty() {
        return Err(Error::InvalidArgument(format!("{} holds no samples", path.display())));
    }
    let empirical = ExactDistribution::empirical(draws.iter().map(Option::as_deref))?;
    let tv = tv_distance(&empirical, &exact);
    let tolerance = statistical_tolerance(exact.len(), draws.len());
    let report = TvReport {
        tv,
        samples: draws.len(),
        failures: draws.iter().filter(|d| d.is_none()).count(),
        support: exact.len(),
        tolerance,
        within_tolerance: tv <= tolerance,
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(EXIT_OK)
}

fn cmd_planar(graph: &Path, mode: PlanarMode, method: PlanarMethod, run: &RunArgs, workers: usize) -> Result<i32> {
    let g = read_graph(graph)?;
    if g.n() % 2 == 1 {
        return Err(Error::OddVertexCount);
    }
    if mode == PlanarMode::Count {
        let all: Vec<usize> = (0..g.n()).collect();
        println!("{}", MatchingCounter::new(&g).count(&all)?);
        return Ok(EXIT_OK);
    }
    let sampler = PlanarSampler::new(&g)?;
    let digest = graph_digest(&g);
    let command = serde_json::json!({
        "name": "planar",
        "mode": mode,
        "method": method,
        "master_seed": run.seed,
        "samples": run.samples,
    });
    let records = draw_all(run.samples, workers, |i| {
        let seed = derive_seed(run.seed, &[tag::SAMPLE, i]);
        let start = Instant::now();
        let s = match method {
            PlanarMethod::Separator => sampler.sample(seed)?,
            PlanarMethod::Sequential => sampler.sample_sequential(seed)?,
        };
        Ok(RunRecord {
            command: command.clone(),
            index: i,
            seed,
            digest: digest.clone(),
            sample: None,
            matching: Some(s.matching),
            meter: s.meter,
            status: Status::Exact,
            wall_time_ms: run.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        })
    })?;
    write_records(&run.out, &records)?;
    Ok(EXIT_OK)
}

/// `%.{digits}g`-style formatting: fixed notation with trailing zeros
/// trimmed when the exponent is moderate, scientific otherwise.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
