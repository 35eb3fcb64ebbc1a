mod commands;
mod config;
mod fail;
mod meta;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, OutputFormat};
use fail::{Failure, Outcome};

/// Transition path analysis of Markov chains.
#[derive(Debug, Parser)]
#[command(name = "tpt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward and backward committors per slice.
    Committor,
    /// Reactive distribution, currents, rates and conservation report.
    Stats,
    /// Estimate a grid chain from an `ulam` descriptor and write it as a chain file.
    UlamBuild,
    /// Sample trajectories (stationary, periodic) or realizations (finite).
    Simulate {
        /// Trajectory length, or number of finite-time realizations.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Committor error of finite windows against the infinite-time committors.
    Converge {
        /// Comma-separated window half-widths, e.g. `0,5,10`.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
    },
    /// Cross-check solvers against path enumeration and Monte Carlo.
    Validate {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Chain file; replaces the config's chain source.
    #[arg(long, global = true)]
    chain: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `NAME=VALUE` for one tolerance, or a bare number for the equation residual.
    #[arg(long = "tolerance", global = true)]
    tolerances: Vec<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

fn apply_tolerance(cfg: &mut ExperimentConfig, arg: &str) -> Outcome<()> {
    let (name, value) = arg.split_once('=').unwrap_or(("equation_residual", arg));
    let mut t = serde_json::to_value(cfg.tolerances).expect("tolerances serialize");
    let obj = t.as_object_mut().expect("tolerances are an object");
    if !obj.contains_key(name) {
        return Err(Failure::input(format!("unknown tolerance {name:?}")));
    }
    let parsed: serde_json::Value =
        serde_json::from_str(value).map_err(|_| Failure::input(format!("bad tolerance value {value:?}")))?;
    obj.insert(name.to_string(), parsed);
    cfg.tolerances = serde_json::from_value(t).map_err(|e| Failure::input(format!("tolerance {name}: {e}")))?;
    Ok(())
}

fn build_config(cli: &Cli) -> Outcome<ExperimentConfig> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(chain) = &c.chain {
        cfg.chain = Some(chain.clone());
        cfg.ulam = None;
    }
    if let Some(out) = &c.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    for t in &c.tolerances {
        apply_tolerance(&mut cfg, t)?;
    }
    match &cli.command {
        Command::Simulate { samples } | Command::Validate { samples, .. } if samples.is_some() => {
            cfg.samples = *samples;
        }
        _ => {}
    }
    if let Command::Converge { windows: Some(w) } = &cli.command {
        cfg.windows = Some(w.clone());
    }
    if let Command::Validate { max_len: Some(l), .. } = &cli.command {
        cfg.max_len = *l;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Outcome<()> {
    let cfg = build_config(cli)?;
    match cli.command {
        Command::Committor => commands::committor(&cfg),
        Command::Stats => commands::stats(&cfg),
        Command::UlamBuild => commands::ulam_build(&cfg),
        Command::Simulate { .. } => commands::simulate_cmd(&cfg),
        Command::Converge { .. } => commands::converge(&cfg),
        Command::Validate { .. } => commands::validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let body = serde_json::json!({ "error": f });
            eprintln!("{}", serde_json::to_string_pretty(&body).expect("error serializes"));
            ExitCode::from(f.code)
        }
    }
}
