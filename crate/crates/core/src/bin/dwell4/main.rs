mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dwell4::dynamics::{Direction, Method, Variable};
use dwell4::model::Model;

/// Exit status for invalid flags, configs and other usage errors.
const EXIT_CONFIG: u8 = 2;
/// Exit status for solver or integrator failures.
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "dwell4", version, about = "Four-mode double-well BEC simulator")]
struct Cli {
    /// Worker threads for sweeps and portraits (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Do not read or write the coefficient cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct PotentialArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Barrier height in recoil units.
    #[arg(long)]
    v0: Option<f64>,
    /// Dimensionless interaction strength.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    domain_halfwidth: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct IntegratorArgs {
    #[arg(long, value_parser = parse_model)]
    model: Option<Model>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    sample_interval: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the eigenproblem and print the model coefficients as JSON.
    Coefficients {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Atom number, enables the Fock-regime check.
        #[arg(long)]
        n_atoms: Option<f64>,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the four lowest eigenfunctions as CSV.
        #[arg(long)]
        wavefunctions: Option<PathBuf>,
    },
    /// Integrate one trajectory.
    Simulate {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        /// Initial state `z0,theta0,z1,theta1,z2,theta2`.
        #[arg(long, allow_hyphen_values = true)]
        initial: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Symmetric fixed points, pitchfork branches and effective fixed points.
    FixedPoints {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<f64>,
        /// Frozen z0 values as `start:end:step`.
        #[arg(long, allow_hyphen_values = true)]
        scan_z0: Option<String>,
        /// Bracketing intervals of the root scan.
        #[arg(long)]
        scan_intervals: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Classify a grid of (V0, gamma) cells and trace the regime boundaries.
    RegimeMap {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `min:max:count`, linear.
        #[arg(long)]
        v0_range: Option<String>,
        /// `min:max:count`, logarithmic.
        #[arg(long)]
        gamma_range: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        domain_halfwidth: Option<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Integrate a family of initial conditions for a phase portrait.
    Portrait {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        /// Frozen-start ground imbalance of the default grid.
        #[arg(long, allow_hyphen_values = true)]
        z0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<f64>,
        /// Projection plane such as `z1,theta1`.
        #[arg(long)]
        plane: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Poincaré section of one trajectory.
    Poincare {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[arg(long, allow_hyphen_values = true)]
        initial: Option<String>,
        /// Section variable (default theta2, crossed in either direction).
        #[arg(long)]
        section_variable: Option<Variable>,
        #[arg(long, allow_hyphen_values = true)]
        section_value: Option<f64>,
        #[arg(long, value_parser = parse_direction)]
        direction: Option<Direction>,
        #[arg(long)]
        plane: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn parse_model(s: &str) -> Result<Model, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown model `{s}` (full, averaged, two-mode)"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown method `{s}` (dopri5, gauss-legendre8)"))
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown direction `{s}` (up, down, both)"))
}

/// A failure tagged with the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn report(&self) -> (u8, serde_json::Value) {
        let (code, kind, e) = match self {
            Failure::Config(e) => (EXIT_CONFIG, "config", e),
            Failure::Numerical(e) => (EXIT_NUMERICAL, "numerical", e),
        };
        let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
        (
            code,
            serde_json::json!({ "error": { "kind": kind, "message": chain.join(": ") } }),
        )
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub trait Tag<T> {
    fn config(self) -> CmdResult<T>;
    fn numerical(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Tag<T> for Result<T, E> {
    fn config(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn numerical(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Numerical(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", serde_json::json!({ "error": { "kind": "usage", "message": msg.trim() } }));
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, json) = f.report();
            eprintln!("{json}");
            ExitCode::from(code)
        }
    }
}
