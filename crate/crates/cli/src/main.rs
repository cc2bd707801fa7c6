//! `mpfilter`: simulate piezoelectric ladder filters, predict the
//! Purcell-limited qubit lifetimes they allow, fit measured responses, and
//! convert measurement files to plot-ready CSV.

use clap::{Parser, Subcommand};
use mpfilter_cli::commands::{cmd_convert, cmd_fit, cmd_simulate, cmd_t1, OutputSink};
use mpfilter_cli::config::{load_job_config, JobConfig};
use mpfilter_cli::CliError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mpfilter",
    version,
    about = "Ladder-filter two-port simulation and Purcell-lifetime analysis"
)]
struct Cli {
    /// Job configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output data path (overrides io.output; families derive suffixed
    /// sibling files).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write data to stdout; diagnostics stay on stderr.
    #[arg(long, global = true)]
    stdout: bool,

    /// Seed recorded in fit reports (the solver itself is deterministic).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a ladder filter's scattering response to CSV (and optionally
    /// Touchstone), over optional Q and series-detuning families.
    Simulate,
    /// Purcell-limited T1 versus qubit frequency, with and without the
    /// filter.
    T1 {
        /// Measured two-port file supplying Re Z_ext via S11 (instead of
        /// the simulated [filter]).
        #[arg(long)]
        s2p: Option<PathBuf>,
        /// Flat environment: filtered and unfiltered columns coincide.
        #[arg(long)]
        no_filter: bool,
    },
    /// Fit a resonator or ladder model to a measured Touchstone file.
    Fit,
    /// Convert a Touchstone two-port file to sweep-schema CSV.
    Convert { input: PathBuf },
}

fn load_required_config(cli: &Cli) -> Result<JobConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs --config <path>".into()))?;
    load_job_config(path)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load_required_config(&cli)?;
            let sink = OutputSink::resolve(cli.out.clone(), &cfg, cli.stdout);
            cmd_simulate(&cfg, &sink)
        }
        Command::T1 { s2p, no_filter } => {
            let cfg = load_required_config(&cli)?;
            let sink = OutputSink::resolve(cli.out.clone(), &cfg, cli.stdout);
            cmd_t1(&cfg, &sink, s2p.as_deref(), *no_filter)
        }
        Command::Fit => {
            let cfg = load_required_config(&cli)?;
            let sink = OutputSink::resolve(cli.out.clone(), &cfg, cli.stdout);
            cmd_fit(&cfg, &sink, cli.seed)
        }
        Command::Convert { input } => {
            let sink = match &cli.config {
                Some(path) => OutputSink::resolve(cli.out.clone(), &load_job_config(path)?, cli.stdout),
                None => OutputSink {
                    path: cli.out.clone(),
                    stdout: cli.stdout,
                },
            };
            cmd_convert(input, &sink)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
