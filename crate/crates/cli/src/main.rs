//! `relaysel` command-line front end.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relaysel_cli::{load_config, run_experiment, write_csv, write_plot_data, write_results, ExperimentKind, RunError, RunOptions, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "relaysel", version, about = "Relay selection experiments for superposition-coded decode-and-forward")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file; defaults apply when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding `experiment.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Monte Carlo trials per point, overriding `experiment.trials`.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Whitespace-separated columns file for plotting.
    #[arg(long, global = true, value_name = "PATH")]
    plot: Option<PathBuf>,
    /// Use the high-SNR closed forms instead of Monte Carlo where applicable.
    #[arg(long, global = true)]
    closed_form: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment: rate_vs_m, power_alloc, snr_power_ratio, snr_beta_split, diversity or place.
    Run { kind: String },
    /// Same as `run place`.
    Place,
    /// Same as `run diversity`.
    Diversity,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(cli: &Cli) -> Result<ScenarioConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            load_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = cli.trials {
        if trials == 0 {
            return Err("--trials must be at least 1".into());
        }
        cfg.experiment.trials = trials;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let kind = match &cli.command {
        Command::Run { kind } => match kind.parse::<ExperimentKind>() {
            Ok(k) => k,
            Err(e) => return fail(EXIT_CONFIG, e),
        },
        Command::Place => ExperimentKind::Place,
        Command::Diversity => ExperimentKind::Diversity,
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let opts = RunOptions {
        closed_form: cli.closed_form,
    };
    let output = match run_experiment(kind, &cfg, opts) {
        Ok(o) => o,
        Err(e @ RunError::Usage(_)) => return fail(EXIT_CONFIG, e),
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    for line in &output.summary {
        eprintln!("{line}");
    }
    let written = match &cli.out {
        Some(path) => write_results(&output.table, path),
        None => write_csv(&output.table, io::stdout().lock()),
    };
    if let Err(e) = written {
        return fail(EXIT_RUNTIME, e);
    }
    if let Some(path) = &cli.plot {
        if let Err(e) = write_plot_data(&output.table, path) {
            return fail(EXIT_RUNTIME, e);
        }
    }
    let _ = io::stdout().flush();
    ExitCode::SUCCESS
}
