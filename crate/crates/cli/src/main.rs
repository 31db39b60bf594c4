use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glauber_lab::config::ExperimentConfig;
use glauber_lab::{accept, run, CliError, ExperimentKind};

#[derive(Parser)]
#[command(name = "glauber-lab", version, about = "Glauber dynamics experiments on trees and hyperbolic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write it in the text format
    BuildGraph(Common),
    /// Exact spectral gap by enumeration
    ExactGap(Common),
    /// Continuous-time trajectories
    Simulate(Common),
    /// Lower and upper bounds on the relaxation time
    Bounds(Common),
    /// Cut-width of the chosen ordering
    Cutwidth(Common),
    /// Correlation decay profile and first-passage bound
    Decay(Common),
    /// Block path-coupling contraction estimates
    Couple(Common),
    /// Grid over beta or theta and depth
    Sweep(Common),
    /// Run the acceptance suite
    Accept {
        #[command(flatten)]
        common: Common,
        /// Only run these criteria (comma separated ids)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set graph.r=4`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Cap on q^n for exact enumeration
    #[arg(long)]
    limit_states: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::load(self.config.as_deref(), &self.set)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(l) = self.limit_states {
            cfg.limits.states = l;
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (kind, common) = match cli.command {
        Command::BuildGraph(c) => (ExperimentKind::BuildGraph, c),
        Command::ExactGap(c) => (ExperimentKind::ExactGap, c),
        Command::Simulate(c) => (ExperimentKind::Simulate, c),
        Command::Bounds(c) => (ExperimentKind::Bounds, c),
        Command::Cutwidth(c) => (ExperimentKind::Cutwidth, c),
        Command::Decay(c) => (ExperimentKind::Decay, c),
        Command::Couple(c) => (ExperimentKind::Couple, c),
        Command::Sweep(c) => (ExperimentKind::Sweep, c),
        Command::Accept { common, only } => {
            let cfg = common.load()?;
            let report = accept::run_accept(cfg.seed, cfg.hash(), &cfg.out, &only)?;
            return match report.failed {
                0 => Ok(()),
                n => Err(CliError::Failed(n)),
            };
        }
    };
    let cfg = common.load()?;
    for f in run::run(kind, &cfg)? {
        println!("{}", cfg.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
