use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dyncluster::bench::{
    gen_sbm_decreasing, gen_sbm_increasing, ingest_knn_stream, KnnSchedule, SbmDecreasingParams,
    SbmIncreasingParams,
};
use dyncluster::pipeline::PipelineConfig;
use dyncluster_cli::generate::{knn_edge_file, parse_features, to_files};
use dyncluster_cli::report::{read_csv, summarize, write_summary, ReportMeta, ReportWriter, SCHEMA};
use dyncluster_cli::run::{run_stream, Mode, RunConfig};
use dyncluster_cli::stream::{StreamFile, TruthFile};
use log::info;

#[derive(Parser)]
#[command(name = "dyncluster", version, about = "Dynamic spectral clustering of edge streams")]
struct Cli {
    /// Log progress (-v) or details (-vv) to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a stream file (<out>.stream) and its ground truth (<out>.truth).
    Generate {
        #[command(subcommand)]
        kind: Generator,
    },
    /// Replay a stream and write <report>.csv, <report>.jsonl and <report>.meta.json.
    Run(RunArgs),
    /// Mean and standard deviation per query position across CSV reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Build a symmetric kNN edge file from a numeric CSV (at most 5000 rows).
    KnnBuild {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// Block model gaining one planted cluster per batch.
    SbmInc {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 250)]
        n_k: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 0.01)]
        q: f64,
        #[arg(long, default_value_t = 40)]
        n_new: usize,
        #[arg(long, default_value_t = 0.95)]
        r1: f64,
        #[arg(long, default_value_t = 1e-5)]
        s: f64,
        #[arg(long, default_value_t = 10)]
        batches: usize,
    },
    /// Block model merging a pair of small clusters per batch.
    SbmDec {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        large_count: usize,
        #[arg(long, default_value_t = 500)]
        large_size: usize,
        #[arg(long, default_value_t = 8)]
        small_count: usize,
        #[arg(long, default_value_t = 50)]
        small_size: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.0002)]
        q: f64,
        #[arg(long, default_value_t = 0.95)]
        r2: f64,
        #[arg(long, default_value_t = 1e-5)]
        s: f64,
        #[arg(long, default_value_t = 4)]
        batches: usize,
    },
    /// Stream from a precomputed kNN edge list, class file and schedule.
    Knn {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    stream: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "dynamic", value_parser = ["dynamic", "static-full", "static-sparsifier"])]
    mode: String,
    #[arg(long, default_value_t = 3.0)]
    tau: f64,
    #[arg(long, default_value_t = 1.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    kmax: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also report eigenvalue gap ratios (one extra eigensolve per query).
    #[arg(long)]
    gaps: bool,
    #[arg(long)]
    report: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_stream(out: &Path, stream: &dyncluster::bench::LabeledStream, comment: &str) -> Result<()> {
    let (file, truth) = to_files(stream, comment);
    let s = out.with_extension("stream");
    let t = out.with_extension("truth");
    fs::write(&s, file.serialize()).with_context(|| format!("writing {}", s.display()))?;
    fs::write(&t, truth.serialize()).with_context(|| format!("writing {}", t.display()))?;
    info!("wrote {} and {}", s.display(), t.display());
    Ok(())
}

fn generate(kind: Generator) -> Result<()> {
    match kind {
        Generator::SbmInc {
            out,
            seed,
            k,
            n_k,
            p,
            q,
            n_new,
            r1,
            s,
            batches,
        } => {
            let params = SbmIncreasingParams {
                k,
                n_k,
                p,
                q,
                n_new,
                r1,
                s,
                batches,
            };
            let stream = gen_sbm_increasing(&params, seed)?;
            write_stream(&out, &stream, &format!("sbm-inc seed={seed} {params:?}"))
        }
        Generator::SbmDec {
            out,
            seed,
            large_count,
            large_size,
            small_count,
            small_size,
            p,
            q,
            r2,
            s,
            batches,
        } => {
            let params = SbmDecreasingParams {
                large_count,
                large_size,
                small_count,
                small_size,
                p,
                q,
                r2,
                s,
                batches,
            };
            let stream = gen_sbm_decreasing(&params, seed)?;
            write_stream(&out, &stream, &format!("sbm-dec seed={seed} {params:?}"))
        }
        Generator::Knn {
            edges,
            classes,
            schedule,
            out,
        } => {
            let sched = KnnSchedule::parse(&read(&schedule)?).with_context(|| schedule.display().to_string())?;
            let ingested = ingest_knn_stream(&read(&edges)?, &read(&classes)?, &sched)?;
            write_stream(&out, &ingested.stream, &format!("knn {}", edges.display()))
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mode: Mode = args.mode.parse().map_err(anyhow::Error::msg)?;
    let stream = StreamFile::parse(&read(&args.stream)?).with_context(|| args.stream.display().to_string())?;
    let truth = match &args.truth {
        Some(p) => Some(TruthFile::parse(&read(p)?).with_context(|| p.display().to_string())?),
        None => None,
    };
    let cfg = RunConfig {
        mode,
        pipeline: PipelineConfig {
            tau: args.tau,
            gamma: args.gamma,
            k_max: args.kmax,
            tol: args.tol,
            seed: args.seed,
            ..PipelineConfig::default()
        },
        gaps: args.gaps,
    };
    let meta = ReportMeta {
        schema: SCHEMA.into(),
        mode: mode.as_str().into(),
        tau: args.tau,
        gamma: args.gamma,
        seed: args.seed,
        k_max: args.kmax,
        tol: args.tol,
        stream: args.stream.display().to_string(),
    };
    let mut writer = ReportWriter::create(&args.report, &meta)?;
    let rows = run_stream(&stream, truth.as_ref(), &cfg, |row| writer.push(row))?;
    info!("{rows} queries answered");
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match cli.command {
        Command::Generate { kind } => generate(kind),
        Command::Run(args) => run(args),
        Command::Report { reports } => {
            let all = reports.iter().map(|p| read_csv(p)).collect::<Result<Vec<_>, _>>()?;
            write_summary(std::io::stdout().lock(), &summarize(&all))?;
            Ok(())
        }
        Command::KnnBuild { features, k, out } => {
            let points = parse_features(&read(&features)?).map_err(anyhow::Error::msg)?;
            if points.is_empty() {
                bail!("{} has no rows", features.display());
            }
            fs::write(&out, knn_edge_file(&points, k).map_err(anyhow::Error::msg)?)
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
    }
}
