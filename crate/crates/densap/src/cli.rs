//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use densap_core::datasets::{generate, DatasetKind, GenSpec};
use densap_core::metrics::{agreement, association_rates};
use densap_core::pap::KCheck;
use densap_core::{
    install_preferences, lap_cluster, neg_sq_euclidean, pap_cluster, run_affinity_propagation, ApConfig, Jitter,
    LapConfig, PapConfig, PreferenceSpec, SimilarityMatrix,
};

use crate::bench::{self, Suite};
use crate::error::{Error, Result};
use crate::io;
use crate::report::{InputSummary, RunReport};

#[derive(Debug, Parser)]
#[command(name = "densap", version, about = "Exemplar clustering of dense similarity matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic point cloud as CSV.
    Gen(GenArgs),
    /// Cluster a point file or a similarity matrix and write a JSON report.
    Cluster(ClusterArgs),
    /// Run a seeded benchmark suite and write CSV rows.
    Bench(BenchArgs),
    /// Compare two label files.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: DatasetKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<DatasetKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = DatasetKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Ap,
    Pap,
    Lap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreferenceArg {
    Median,
    Value(f64),
}

fn parse_preference(s: &str) -> Result<PreferenceArg, String> {
    if s == "median" {
        return Ok(PreferenceArg::Median);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(PreferenceArg::Value(v)),
        _ => Err("expected `median` or a finite number".to_owned()),
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "matrix"])))]
pub struct ClusterArgs {
    /// Point CSV; similarities are negative squared Euclidean distances.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Dense similarity CSV. Its diagonal is used as preferences unless a
    /// preference option is given.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Ap)]
    pub algo: Algorithm,
    /// `median` or a shared numeric preference.
    #[arg(long, value_parser = parse_preference, allow_hyphen_values = true, conflicts_with = "preference_file")]
    pub preference: Option<PreferenceArg>,
    /// One preference per line.
    #[arg(long)]
    pub preference_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 50)]
    pub convits: usize,
    /// Scale of symmetric tie-breaking noise added to off-diagonal similarities.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Seed for jitter, block shuffling and landmark sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Expected maximum cluster count, enables the block-count check.
    #[arg(long)]
    pub expected_clusters: Option<usize>,
    /// Partition in input order.
    #[arg(long)]
    pub no_shuffle: bool,
    #[arg(long, default_value_t = 100)]
    pub landmarks: usize,
    #[arg(long, default_value_t = 5000)]
    pub m0: usize,
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 20)]
    pub refine_sweeps: usize,
    /// Record net similarity per iteration in the report.
    #[arg(long)]
    pub trace: bool,
    /// Also write the trace as CSV.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
    /// Write the exemplar index of every point, one per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub suite: Suite,
    /// Sizes for pap-iterations.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000")]
    pub sizes: Vec<usize>,
    /// Size for lap-accuracy and pap-k-sweep.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Block count for pap-iterations.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Block counts for pap-k-sweep.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub ks: Vec<usize>,
    /// Landmark counts for lap-accuracy.
    #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500")]
    pub landmarks: Vec<usize>,
    /// Number of seeds; runs use seeds `first-seed..first-seed + seeds`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricsMode {
    Rates,
    Agreement,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub predicted: PathBuf,
    pub truth: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricsMode::Rates)]
    pub mode: MetricsMode,
}

/// Runs a parsed command. Primary output goes to `out` unless the command
/// names an output file; warnings go to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&args, out),
        Command::Cluster(args) => cmd_cluster(&args, out, err),
        Command::Bench(args) => cmd_bench(&args, out),
        Command::Metrics(args) => cmd_metrics(&args, out),
    }
}

fn with_output(path: Option<&Path>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => f(&mut io::create(p)?),
        None => f(out),
    }
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let spec = GenSpec {
        noise: args.noise,
        ..GenSpec::new(args.kind, args.n, args.seed)
    };
    let points = generate(&spec)?;
    with_output(args.output.as_deref(), out, |w| io::write_points(w, &points))
}

fn load_similarities(args: &ClusterArgs) -> Result<(SimilarityMatrix, InputSummary)> {
    let (raw, source, default_pref) = match (&args.input, &args.matrix) {
        (Some(p), _) => (neg_sq_euclidean(&io::read_points(p)?)?, p, None),
        (None, Some(p)) => (io::read_matrix(p)?, p, Some("given")),
        (None, None) => return Err(Error::Usage("one of --input or --matrix is required".into())),
    };
    let (spec, label) = if let Some(path) = &args.preference_file {
        let rows = io::read_float_rows(io::open(path)?)?;
        if let Some(line) = rows.iter().position(|r| r.len() != 1) {
            return Err(Error::Ragged {
                line: line + 1,
                expected: 1,
                found: rows[line].len(),
            });
        }
        (
            Some(PreferenceSpec::Explicit(rows.into_iter().map(|r| r[0]).collect())),
            "file".to_owned(),
        )
    } else {
        match (args.preference, default_pref) {
            (Some(PreferenceArg::Value(v)), _) => (Some(PreferenceSpec::Uniform(v)), format!("uniform:{v}")),
            (Some(PreferenceArg::Median), _) | (None, None) => (Some(PreferenceSpec::Median), "median".to_owned()),
            (None, Some(given)) => (None, given.to_owned()),
        }
    };
    let s = match spec {
        Some(spec) => install_preferences(raw, &spec)?,
        None => raw,
    };
    let summary = InputSummary {
        source: source.display().to_string(),
        n: s.n(),
        preference: label,
    };
    Ok((s, summary))
}

fn ap_config(args: &ClusterArgs) -> ApConfig {
    ApConfig {
        lambda: args.lambda,
        max_iter: args.max_iter,
        convits: args.convits,
        jitter: args.jitter.map(|scale| Jitter {
            scale,
            seed: args.seed.unwrap_or(0),
        }),
        trace: args.trace || args.trace_csv.is_some(),
    }
}

pub fn cmd_cluster(args: &ClusterArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (s, input) = load_similarities(args)?;
    let ap = ap_config(args);
    let traced = ap.trace;
    let start = Instant::now();
    let mut report = match args.algo {
        Algorithm::Ap => {
            let run = run_affinity_propagation(&s, &ap, None)?;
            RunReport::from_ap(input, ap, run)
        }
        Algorithm::Pap => {
            let defaults = PapConfig::default();
            let cfg = PapConfig {
                k: args.k,
                expected_max_clusters: args.expected_clusters,
                shuffle_seed: if args.no_shuffle {
                    None
                } else {
                    args.seed.or(defaults.shuffle_seed)
                },
                inner: ApConfig { trace: false, ..ap },
                outer: ap,
            };
            let run = pap_cluster(&s, &cfg)?;
            if let Some(KCheck::AboveBound { bound }) = run.k_check {
                writeln!(err, "warning: k = {} is not below n / (4C) = {bound}", cfg.k)?;
            }
            RunReport::from_pap(input, cfg, run)
        }
        Algorithm::Lap => {
            let cfg = LapConfig {
                num_landmarks: args.landmarks,
                m0: args.m0,
                max_depth: args.max_depth,
                refine_sweeps: args.refine_sweeps,
                seed: args.seed.unwrap_or(0),
                inner: ApConfig { trace: false, ..ap },
            };
            let run = lap_cluster(&s, &cfg)?;
            RunReport::from_lap(input, cfg, run, traced)
        }
    };
    report.elapsed_seconds = start.elapsed().as_secs_f64();

    if let Some(path) = &args.labels_out {
        io::write_labels(io::create(path)?, &report.result.idx)?;
    }
    if let Some(path) = &args.trace_csv {
        report.write_trace_csv(io::create(path)?)?;
    }
    let json = report.to_json()?;
    with_output(args.output.as_deref(), out, |w| {
        w.write_all(json.as_bytes())?;
        Ok(w.flush()?)
    })
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let seeds: Vec<u64> = (args.first_seed..args.first_seed + args.seeds).collect();
    if seeds.is_empty() {
        return Err(Error::Usage("--seeds must be positive".into()));
    }
    with_output(args.output.as_deref(), out, |w| match args.suite {
        Suite::PapIterations => bench::write_csv(&bench::pap_iterations(&args.sizes, args.k, &seeds)?, w),
        Suite::LapAccuracy => bench::write_csv(&bench::lap_accuracy(args.n, &args.landmarks, &seeds)?, w),
        Suite::PapKSweep => bench::write_csv(&bench::pap_k_sweep(args.n, &args.ks, &seeds)?, w),
    })
}

pub fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let predicted = io::read_labels(&args.predicted)?;
    let truth = io::read_labels(&args.truth)?;
    match args.mode {
        MetricsMode::Rates => {
            if predicted.len() < 2 {
                return Err(Error::Usage("association rates need at least two points".into()));
            }
            let r = association_rates(&predicted, &truth)?;
            writeln!(out, "tar {:.6}\nfar {:.6}", r.tar, r.far)?;
        }
        MetricsMode::Agreement => writeln!(out, "agreement {:.6}", agreement(&predicted, &truth)?)?,
    }
    Ok(())
}
