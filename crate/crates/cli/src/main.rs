// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use cdcluster_cli::commands;
use cdcluster_cli::{CliError, Overrides, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cdcluster", version, about = "Cluster-state preparation by counterdiabatic quench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Full and vortex-free spectra over the lambda grid.
    Spectrum,
    /// Quench from lambda0 to lambdaf for every T and mode.
    Evolve,
    /// Compare the real-space driving term with the exact one.
    CdCheck,
    /// Solve for the cluster state and verify its stabilizers.
    Cluster,
    /// Print the resolved configuration as TOML.
    PrintConfig,
}

#[derive(Args, Debug)]
struct Flags {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    np: Option<usize>,
    #[arg(long, global = true)]
    j: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambdaf: Option<f64>,
    /// Total times, comma separated.
    #[arg(long = "t", global = true)]
    t_list: Option<String>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// none, oracle, analytic or all.
    #[arg(long, global = true)]
    cd_mode: Option<String>,
    #[arg(long = "nmax", global = true)]
    n_max: Option<usize>,
    /// Comma-separated lambda values.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda_grid: Option<String>,
    /// Output directory.
    #[arg(long = "out", global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plaquette signs for `cluster`, e.g. 1,-1,1,1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    signs: Option<String>,
    /// Sweep rate for `cd-check`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    rate: Option<f64>,
    #[arg(long, global = true)]
    sample_every: Option<usize>,
    /// Disable the worker pool.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            np: self.np,
            j: self.j,
            lambda0: self.lambda0,
            lambdaf: self.lambdaf,
            t_list: self.t_list.clone(),
            dt: self.dt,
            cd_mode: self.cd_mode.clone(),
            n_max: self.n_max,
            lambda_grid: self.lambda_grid.clone(),
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            signs: self.signs.clone(),
            cd_rate: self.rate,
            sample_every: self.sample_every,
            sequential: self.sequential,
        }
    }
}

fn resolve(flags: &Flags) -> Result<RunConfig, CliError> {
    let mut config = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    config.apply(&flags.overrides())?;
    config.resolve()
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = resolve(&cli.flags)?;
    match cli.command {
        Command::PrintConfig => print!("{}", commands::print_config(&config)),
        Command::Spectrum => {
            let s = commands::run_spectrum(&config)?;
            log::info!("vortex-free dimension {}, gap at lambda0 {}", s.vortex_free_dim, s.gap_at_lambda0);
        }
        Command::Evolve => {
            let s = commands::run_evolve(&config)?;
            for r in &s.runs {
                log::info!("{} T = {}: F = {}", r.mode, r.t_total, r.final_fidelity);
            }
        }
        Command::CdCheck => {
            let r = commands::run_cdcheck(&config)?;
            log::info!("largest ground action error {}", r.max_ground_action_error);
        }
        Command::Cluster => {
            commands::run_cluster(&config)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
