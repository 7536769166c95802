//! `pd` — build, evaluate, and run power-distortion decision regions.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes fixed for scriptability.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;
pub const EXIT_VERSION: u8 = 4;
pub const EXIT_PARSE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "pd",
    version,
    about = "Power-distortion interference classifier for GNSS observables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Config file (`key = value` sections); flags override file values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// RNG seed (mandatory for sampling commands, via flag or config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cost function for region building and risk evaluation.
    #[arg(long, value_parser = ["uniform", "theta"], global = true)]
    cost: Option<String>,

    /// Prior probabilities as `pi0,pi1,pi2,pi3`.
    #[arg(long, global = true)]
    pi: Option<String>,

    /// Grid extent as `dmin,dmax,nd,pmin,pmax,np`.
    #[arg(long, global = true)]
    grid: Option<String>,

    /// Parameter draws N_P.
    #[arg(long = "np", global = true)]
    n_p: Option<usize>,

    /// Observations per draw N_M.
    #[arg(long = "nm", global = true)]
    n_m: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate tagged observations and write them as CSV.
    Sample {
        #[command(flatten)]
        common: CommonOpts,
        /// Output CSV path.
        #[arg(long, default_value = "fig5_samples.csv")]
        out: std::path::PathBuf,
    },
    /// Build decision regions by Monte-Carlo risk minimization.
    Build {
        #[command(flatten)]
        common: CommonOpts,
        /// Output region file.
        #[arg(long, default_value = "regions.txt")]
        out: std::path::PathBuf,
        /// Also dump the labeled grid as CSV for plotting.
        #[arg(long)]
        dump_grid: Option<std::path::PathBuf>,
    },
    /// Evaluate regions on a fresh sample set (or a CSV) and print the
    /// classification matrix.
    Evaluate {
        #[command(flatten)]
        common: CommonOpts,
        /// Region file produced by `build`.
        #[arg(long)]
        regions: std::path::PathBuf,
        /// Evaluate against an existing observation CSV instead of fresh draws.
        #[arg(long)]
        observations: Option<std::path::PathBuf>,
        /// Output CSV for the classification matrix.
        #[arg(long, default_value = "matrix.csv")]
        out: std::path::PathBuf,
    },
    /// Classify an accumulation + power log pair and emit decisions,
    /// cumulative history, and alarms.
    Classify {
        #[command(flatten)]
        common: CommonOpts,
        /// Region file produced by `build`.
        #[arg(long)]
        regions: std::path::PathBuf,
        /// Accumulation log(s) (`PDACCUM v1`), one per channel.
        #[arg(long, required = true, num_args = 1..)]
        accum: Vec<std::path::PathBuf>,
        /// Power log (`PDPOWER v1`).
        #[arg(long)]
        power: std::path::PathBuf,
        /// m-of-k windowed vote as `m,k`.
        #[arg(long)]
        vote: Option<String>,
        /// Channels required for a multi-channel alarm.
        #[arg(long)]
        channels: Option<usize>,
        /// Quiet window `t0,t1` (s) for noise and power references.
        #[arg(long)]
        quiet: Option<String>,
        /// Output directory for decision/history/alarm CSVs.
        #[arg(long, default_value = "pd-out")]
        out: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample { common, out } => commands::sample(&common, &out),
        Command::Build {
            common,
            out,
            dump_grid,
        } => commands::build(&common, &out, dump_grid.as_deref()),
        Command::Evaluate {
            common,
            regions,
            observations,
            out,
        } => commands::evaluate(&common, &regions, observations.as_deref(), &out),
        Command::Classify {
            common,
            regions,
            accum,
            power,
            vote,
            channels,
            quiet,
            out,
        } => commands::classify(
            &common,
            &regions,
            &accum,
            &power,
            vote.as_deref(),
            channels,
            quiet.as_deref(),
            &out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
