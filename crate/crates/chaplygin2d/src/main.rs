//! Batch CLI over the chaplygin2d library: single runs, lifespan sweeps,
//! null-condition reports, and convergence studies.
//!
//! Exit codes: 0 success (including detected blow-ups), 2 configuration
//! errors, 3 aborted runs.

use chaplygin2d::eos::GasKind;
use chaplygin2d::harness::{
    cmd_converge, cmd_nullcheck, cmd_run, cmd_sweep, ExitStatus, GridSection, RunConfig,
    RunOptions, SweepOptions,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chaplygin2d", version, about = "Radially symmetric Euler laboratory for Chaplygin and polytropic gases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Configuration file (sectioned key = value); defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Equation of state override.
    #[arg(long, value_name = "KIND")]
    eos: Option<String>,

    /// Perturbation amplitude override.
    #[arg(long, value_name = "F")]
    epsilon: Option<f64>,

    /// Final time override.
    #[arg(long, value_name = "F")]
    tmax: Option<f64>,

    /// Cell count override.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,

    /// Worker threads for sweeps.
    #[arg(long, value_name = "K", default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and emit series.csv, snapshots/, report.json.
    Run(CommonOpts),
    /// Lifespan sweep over amplitudes; emits lifespan.csv and comparison.json.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Amplitudes to sweep (repeat the flag; at least two).
        #[arg(long = "sweep-epsilon", value_name = "F")]
        sweep_epsilon: Vec<f64>,
        /// Cell count for the polytropic legs (they need resolution to
        /// express gradient growth).
        #[arg(long, value_name = "N")]
        poly_grid: Option<usize>,
        /// Domain radius for the polytropic legs.
        #[arg(long, value_name = "F")]
        poly_rmax: Option<f64>,
    },
    /// Null-condition residual report (JSON to stdout).
    Nullcheck {
        #[command(flatten)]
        common: CommonOpts,
        /// Polytropic adiabatic exponent.
        #[arg(long, value_name = "F")]
        gamma: Option<f64>,
    },
    /// Grid-refinement study; emits convergence.csv.
    Converge {
        #[command(flatten)]
        common: CommonOpts,
        /// Resolutions, each dividing the next (repeat the flag; at least three).
        #[arg(long = "resolution", value_name = "N")]
        resolution: Vec<usize>,
    },
}

fn parse_kind(s: &str) -> Result<GasKind, chaplygin2d::Error> {
    match s {
        "chaplygin" => Ok(GasKind::Chaplygin),
        "polytropic" => Ok(GasKind::Polytropic),
        other => Err(chaplygin2d::Error::Config(format!(
            "unknown eos kind '{other}' (expected chaplygin or polytropic)"
        ))),
    }
}

fn load_config(opts: &CommonOpts) -> Result<RunConfig, chaplygin2d::Error> {
    let mut config = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(kind) = &opts.eos {
        config.eos.kind = parse_kind(kind)?;
    }
    if let Some(eps) = opts.epsilon {
        config.profile.epsilon = eps;
    }
    if let Some(tmax) = opts.tmax {
        config.run.t_max = tmax;
    }
    if let Some(n) = opts.grid {
        config.grid.n = n;
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<i32, chaplygin2d::Error> {
    match cli.command {
        Command::Run(opts) => {
            let config = load_config(&opts)?;
            let artifacts = cmd_run(&config, Some(&opts.out), &RunOptions::default())?;
            match &artifacts.status {
                ExitStatus::Completed { t_end } => {
                    println!("completed at t = {t_end}");
                }
                ExitStatus::Blowup { t_star } => {
                    println!("blowup at t* = {t_star}");
                }
                ExitStatus::Aborted { reason, t_last } => {
                    eprintln!("aborted at t = {t_last}: {reason}");
                }
            }
            Ok(artifacts.status.exit_code())
        }
        Command::Sweep {
            common,
            sweep_epsilon,
            poly_grid,
            poly_rmax,
        } => {
            let config = load_config(&common)?;
            let kinds = match &common.eos {
                Some(kind) => vec![parse_kind(kind)?],
                None => vec![GasKind::Polytropic, GasKind::Chaplygin],
            };
            let options = SweepOptions {
                kinds,
                poly_grid: poly_grid.map(|n| GridSection {
                    r_max: poly_rmax.unwrap_or(config.grid.r_max),
                    n,
                }),
                workers: common.workers,
            };
            let comparison = cmd_sweep(&config, &sweep_epsilon, &options, &common.out)?;
            println!("{}", serde_json::to_string_pretty(&comparison)?);
            Ok(0)
        }
        Command::Nullcheck { common, gamma } => {
            let mut config = load_config(&common)?;
            if let Some(g) = gamma {
                config.eos.gamma = g;
                config.validate()?;
            }
            let report = cmd_nullcheck(&config)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            Ok(0)
        }
        Command::Converge { common, resolution } => {
            let config = load_config(&common)?;
            let table = cmd_converge(&config, &resolution, Some(&common.out))?;
            for row in &table.rows {
                println!(
                    "{:>4}  n = {:<7} error = {:<12.5e} order = {:.3}",
                    row.field, row.n, row.error, row.order
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
