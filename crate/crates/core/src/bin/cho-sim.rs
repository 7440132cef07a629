use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cho_sim::cli::{self, CliOptions, Figure, TraceLevel};
use cho_sim::exec::Execution;
use cho_sim::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureArg {
    F4,
    F5,
    F6,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceArg {
    Off,
    Events,
    Links,
}

/// Baseline and conditional handover simulator for beamformed mm-Wave networks.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Scenario file. Overrides the sweep file's scenario when both are given.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Sweep file (modes, procedures, xi_access, n_b, seeds).
    #[arg(long)]
    sweep: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    parallel: Option<u32>,
    /// Emit only this figure series.
    #[arg(long, value_enum)]
    figure: Option<FigureArg>,
    /// Comma-separated seeds replacing the sweep's seed list.
    #[arg(long, value_delimiter = ',')]
    seed_override: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value = "off")]
    trace: TraceArg,
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) -> anyhow::Result<()> {
    use anyhow::Context;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring worker threads")
}

// without the thread pool every path runs on the calling thread
#[cfg(not(feature = "parallel"))]
fn configure_threads(_n: usize) -> anyhow::Result<()> {
    Ok(())
}

fn options(args: Args) -> anyhow::Result<CliOptions> {
    let exec = match args.parallel {
        Some(1) => Execution::Sequential,
        Some(n) => {
            configure_threads(n as usize)?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    Ok(CliOptions {
        scenario: args.scenario,
        sweep: args.sweep,
        out: args.out,
        exec,
        figure: args.figure.map(|f| match f {
            FigureArg::F4 => Figure::F4,
            FigureArg::F5 => Figure::F5,
            FigureArg::F6 => Figure::F6,
        }),
        seed_override: args.seed_override,
        trace: match args.trace {
            TraceArg::Off => TraceLevel::Off,
            TraceArg::Events => TraceLevel::Events,
            TraceArg::Links => TraceLevel::Links,
        },
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_config_error() => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = options(args).and_then(|opts| cli::run(&opts).map_err(anyhow::Error::from));
    match result {
        Ok(summary) => {
            let figures: Vec<String> = summary.figures.iter().map(|f| f.to_string()).collect();
            println!(
                "{} rows written to {} (figures: {})",
                summary.results.rows.len(),
                summary.out_dir.display(),
                if figures.is_empty() { "none".to_string() } else { figures.join(", ") }
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
