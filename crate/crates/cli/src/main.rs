//! `hessdamp`: run, compare and plot the inertial Hessian-damped solvers.

mod commands;
mod config;
mod problem;
mod svg;
mod traces;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::plot::PlotKind;
use commands::{Ctx, NumericalFailure};

#[derive(Parser)]
#[command(name = "hessdamp", version, about = "Inertial gradient methods with Hessian-driven damping")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file with flat dotted keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in configuration to start from.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for initial points, sampling and noise (overrides `seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override a config key, e.g. `--set solver.beta=0.04`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Refuse invalid parameters and fail on numerical problems (exit 2).
    #[arg(long, global = true)]
    strict: bool,

    /// Run schemes and Monte-Carlo samples concurrently.
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured scheme and write traces plus summary.json.
    Run,
    /// Plot trace CSVs as an SVG chart.
    Plot {
        #[arg(long, value_enum, default_value = "residual_vs_iter")]
        kind: PlotKind,
        /// Output file; defaults to `<out>/<kind>.svg`.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Trace CSVs written by `run`.
        #[arg(required = true, value_name = "TRACE")]
        traces: Vec<PathBuf>,
    },
    /// Classify endpoints of runs started uniformly in the init box.
    Montecarlo,
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// Integrate the continuous-time system with RK4.
    Ode,
}

impl Common {
    fn load(&self) -> Result<config::RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        let map = config::load(self.preset.as_deref(), self.config.as_deref(), &overrides)?;
        config::resolve(map)
    }

    fn ctx(&self, cfg_out: Option<&std::path::Path>) -> Ctx {
        Ctx {
            out: self
                .out
                .clone()
                .or_else(|| cfg_out.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            strict: self.strict,
            parallel: self.parallel,
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Plot {
            kind,
            output,
            traces,
        } => {
            let ctx = common.ctx(None);
            let output = output.unwrap_or_else(|| ctx.out.join(format!("{}.svg", kind.file_stem())));
            commands::plot::cmd_plot(kind, &traces, &output)
        }
        command => {
            let cfg = common.load()?;
            let ctx = common.ctx(Some(&cfg.out));
            match command {
                Command::Run => commands::run::cmd_run(&cfg, &ctx),
                Command::Montecarlo => commands::montecarlo::cmd_montecarlo(&cfg, &ctx),
                Command::Gradcheck { corrupt_gradient } => {
                    commands::gradcheck::cmd_gradcheck(&cfg, corrupt_gradient)
                }
                Command::Ode => commands::ode::cmd_ode(&cfg, &ctx),
                Command::Plot { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<NumericalFailure>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
