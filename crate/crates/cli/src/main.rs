//! `gffmax`: experiments on the maximum of the 2D discrete Gaussian free
//! field and its branching random walk analogue.

mod commands;
mod config;
mod exit;
mod lock;
mod persist;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gffmax_core::brw::DEFAULT_LEAF_BUDGET;

use crate::commands::{BrwRequest, ExtremesRequest, GreenRequest, HierarchyRequest, SampleRequest};
use crate::config::{ConfigFile, ExperimentConfig, ToleranceOverrides};
use crate::exit::Failure;

#[derive(Parser, Debug)]
#[command(name = "gffmax", version, about = "Extremes of the 2D discrete Gaussian free field")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON experiment configuration; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Largest interior site count for dense matrices.
    #[arg(long, global = true)]
    dense_cutoff: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the Green matrix or its diagonal as CSV.
    Green(GreenArgs),
    /// Draw fields and record their maxima.
    Sample(SampleArgs),
    /// Decompose a field into dyadic levels, or check the Markov property exactly.
    Hierarchy(HierarchyArgs),
    /// Monte Carlo statistics of the maximum over a range of levels.
    Extremes(ExtremesArgs),
    /// Distribution recursion for the maximum of a branching random walk.
    Brw(BrwArgs),
    /// Render tables from persisted results.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
}

#[derive(Args, Debug)]
struct GreenArgs {
    /// Box side N, a power of two.
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "dense")]
    spectral: bool,
    /// Dense form (the default).
    #[arg(long)]
    dense: bool,
    /// Only the diagonal.
    #[arg(long)]
    variance: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Box side N, a power of two.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Cholesky sampling from the dense Green matrix.
    #[arg(long)]
    dense: bool,
    /// Also write every field, as binary and CSV.
    #[arg(long)]
    dump_fields: bool,
}

#[derive(Args, Debug)]
struct HierarchyArgs {
    /// Box side N, a power of two.
    #[arg(long)]
    n: usize,
    /// Conditioning level.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Exact covariance checks instead of a sampled decomposition.
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct ExtremesArgs {
    #[arg(long)]
    n_min: Option<u32>,
    #[arg(long)]
    n_max: Option<u32>,
    /// Samples per level.
    #[arg(long)]
    samples: Option<usize>,
    /// Increment threshold K of the subsequence detector.
    #[arg(long)]
    threshold: Option<f64>,
    /// SE multiplier for inequality checks.
    #[arg(long)]
    inequality_se: Option<f64>,
    /// SE multiplier for comparisons with exact values.
    #[arg(long)]
    point_se: Option<f64>,
    /// Persist only; do not print the reports.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct BrwArgs {
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 4)]
    branching: u32,
    /// Increment standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Grid step of the recursion.
    #[arg(long)]
    step: Option<f64>,
    /// Also simulate this many trees.
    #[arg(long)]
    simulate: Option<usize>,
    /// Largest number of simulated leaves.
    #[arg(long, default_value_t = DEFAULT_LEAF_BUDGET)]
    leaf_budget: f64,
    /// Write the final distribution function.
    #[arg(long)]
    dump_cdf: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory of persisted results; defaults to the output directory.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    inequality_se: Option<f64>,
    #[arg(long)]
    point_se: Option<f64>,
}

fn flags(cli: &Cli) -> ConfigFile {
    let mut f = ConfigFile {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out.clone(),
        dense_cutoff: cli.dense_cutoff,
        ..Default::default()
    };
    match &cli.command {
        Command::Extremes(a) => {
            f.n_min = a.n_min;
            f.n_max = a.n_max;
            f.samples = a.samples;
            f.threshold = a.threshold;
            f.tolerances = ToleranceOverrides {
                inequality: a.inequality_se,
                point: a.point_se,
            };
        }
        Command::Report(a) => {
            f.threshold = a.threshold;
            f.tolerances = ToleranceOverrides {
                inequality: a.inequality_se,
                point: a.point_se,
            };
        }
        _ => {}
    }
    f
}

fn run(cli: Cli) -> Result<String, Failure> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let cfg = ExperimentConfig::resolve(file.as_ref(), &flags(&cli))?;
    match cli.command {
        Command::Green(a) => {
            let Format::Csv = a.format;
            commands::green(
                &cfg,
                &GreenRequest {
                    side: a.n,
                    spectral: a.spectral,
                    variance: a.variance,
                },
            )
        }
        Command::Sample(a) => commands::sample(
            &cfg,
            &SampleRequest {
                side: a.n,
                count: a.count,
                dense: a.dense,
                dump_fields: a.dump_fields,
            },
        ),
        Command::Hierarchy(a) => commands::hierarchy(
            &cfg,
            &HierarchyRequest {
                side: a.n,
                k: a.k,
                exact: a.exact,
            },
        ),
        Command::Extremes(a) => commands::extremes(&cfg, &ExtremesRequest { quiet: a.quiet }),
        Command::Brw(a) => commands::brw(
            &cfg,
            &BrwRequest {
                depth: a.depth,
                branching: a.branching,
                sigma: a.sigma,
                step: a.step,
                simulate: a.simulate,
                leaf_budget: a.leaf_budget,
                dump_cdf: a.dump_cdf,
            },
        ),
        Command::Report(a) => {
            let dir = a.dir.unwrap_or_else(|| cfg.out.clone());
            commands::report(&dir, cfg.tolerances, cfg.threshold)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("gffmax: {}", f.message.trim_end());
            ExitCode::from(f.code as u8)
        }
    }
}
