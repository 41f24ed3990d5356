use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shellmc::Result;
use shellmc_cli::commands::{
    build_workspace, cmd_build_ham, cmd_exact, cmd_gfmc, cmd_pipeline, cmd_qsd,
    cmd_sweep_shots, cmd_sweep_trotter,
};
use shellmc_cli::config::RunConfig;
use shellmc_cli::exit_code;

#[derive(Parser)]
#[command(name = "shellmc", about = "Shell-model fixed-node GFMC with quantum subspace trial states", version)]
struct Cli {
    /// Run configuration file (flat key = value lines).
    #[arg(short, long, global = true, default_value = "run.conf")]
    config: PathBuf,

    /// Override a config key, e.g. --set gfmc.seed=3. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the sector Hamiltonian and dump it as JSON.
    BuildHam,
    /// Exact lowest eigenvalues of the sector Hamiltonian.
    Exact {
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Solve the quantum-subspace trial state(s).
    Qsd,
    /// Fixed-node GFMC with the classical determinant trial.
    Gfmc,
    /// Full pipeline: exact line, QSD trial, classical + quantum GFMC.
    Pipeline,
    /// Repeat the quantum-trial pipeline over a list of shot counts.
    SweepShots,
    /// QSD energy vs Trotter step against the exact-evolution backend.
    SweepTrotter,
}

fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::load(&cli.config, &cli.overrides)?;
    let ws = build_workspace(config)?;
    match cli.command {
        Command::BuildHam => cmd_build_ham(&ws),
        Command::Exact { levels } => cmd_exact(&ws, levels),
        Command::Qsd => cmd_qsd(&ws),
        Command::Gfmc => cmd_gfmc(&ws),
        Command::Pipeline => cmd_pipeline(&ws),
        Command::SweepShots => cmd_sweep_shots(&ws),
        Command::SweepTrotter => cmd_sweep_trotter(&ws),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
