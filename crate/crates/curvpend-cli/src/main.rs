//! `curvpend`: simulate and analyze a pendulum whose pivot rides a geodesic
//! of a constant-curvature surface.
//!
//! Exit codes: 0 success, 1 verification failure or I/O error, 2 invalid
//! configuration, 3 numeric abort (partial output is still flushed).

mod config;
mod run;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "curvpend",
    version,
    about = "Pendulum dynamics on constant-curvature surfaces",
    after_help = "Config files hold `key = value` lines (keys = long flag names, `#` comments);\n\
                  flags override file values, and CURVPEND_CONFIG names a default file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory and emit it as CSV
    Simulate(Flags),
    /// Classify a grid of initial conditions as libration or circulation
    Portrait(Flags),
    /// Compare the exact libration period against a simulated one
    Period(Flags),
    /// Quantized level spacings: closed form vs finite-difference operator
    Spectrum(Flags),
    /// Check closed-form equations of motion against the numeric oracle
    Verify(Flags),
}

/// One shared flag set; every flag has a config-file key of the same name.
/// Unset flags fall back to the config file, then to built-in defaults.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Gaussian curvature K (0 = flat)
    #[arg(long, allow_negative_numbers = true)]
    curvature: Option<f64>,
    /// Rod length rho
    #[arg(long, allow_negative_numbers = true)]
    rod_length: Option<f64>,
    /// Bob mass m
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<f64>,
    /// Pivot speed v at t = 0
    #[arg(long, allow_negative_numbers = true)]
    speed: Option<f64>,
    /// Pivot acceleration profile: none | const:a | sin:A,omega | piecewise:t0,a0;t1,a1;...
    #[arg(long)]
    accel: Option<String>,
    /// Initial deflection angle (radians unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    zeta0: Option<f64>,
    /// Initial angular rate (radians/s unless --degrees)
    #[arg(long, allow_negative_numbers = true)]
    zeta_dot0: Option<f64>,
    /// Use the elastic-rod system instead of the rigid one
    #[arg(long)]
    elastic: bool,
    /// Spring constant of the elastic rod
    #[arg(long, allow_negative_numbers = true)]
    spring_k: Option<f64>,
    /// Initial rod elongation (elastic only)
    #[arg(long, allow_negative_numbers = true)]
    l0: Option<f64>,
    /// Initial elongation rate (elastic only)
    #[arg(long, allow_negative_numbers = true)]
    l_dot0: Option<f64>,
    /// Step size (initial step for the adaptive integrator)
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// End time of the simulation
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Integration scheme: rk4 | leapfrog | adaptive
    #[arg(long)]
    integrator: Option<String>,
    /// Relative tolerance (adaptive integrator)
    #[arg(long, allow_negative_numbers = true)]
    rel_tol: Option<f64>,
    /// Absolute tolerance (adaptive integrator)
    #[arg(long, allow_negative_numbers = true)]
    abs_tol: Option<f64>,
    /// Append ambient pivot/mass coordinates to the CSV (needs K != 0)
    #[arg(long)]
    embed: bool,
    /// Planck constant for the spectrum commands
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    /// Grid points for the finite-difference spectrum (>= 200)
    #[arg(long)]
    grid_n: Option<usize>,
    /// Number of energy levels to report
    #[arg(long)]
    n_levels: Option<usize>,
    /// Write output to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Config file of `key = value` lines (overrides CURVPEND_CONFIG)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interpret zeta0 / zeta-dot0 as degrees
    #[arg(long)]
    degrees: bool,
    /// Keep every n-th integration step in the output
    #[arg(long)]
    sample_stride: Option<usize>,
    /// Portrait grid as zmin:zmax:nz,vmin:vmax:nv (portrait command)
    #[arg(long, allow_hyphen_values = true)]
    portrait_grid: Option<String>,
}

/// Error carrying its process exit code; message goes to stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn io(err: std::io::Error) -> Self {
        CliError {
            code: 1,
            message: format!("i/o error: {err}"),
        }
    }

    /// Library errors split by nature: bad parameters are config errors,
    /// runtime blow-ups are numeric aborts.
    fn from_lib(err: curvpend::Error) -> Self {
        use curvpend::Error as E;
        let code = match &err {
            E::InvalidParam { .. }
            | E::FlatCurvature { .. }
            | E::TrigPole { .. }
            | E::OutOfDomain { .. }
            | E::UnsupportedPairing { .. } => 2,
            E::NonFinite { .. }
            | E::StepUnderflow { .. }
            | E::SingularMassMatrix { .. }
            | E::EigenFailure { .. } => 3,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(flags) => run::simulate(flags),
        Command::Portrait(flags) => run::portrait(flags),
        Command::Period(flags) => run::period(flags),
        Command::Spectrum(flags) => run::spectrum(flags),
        Command::Verify(flags) => run::verify(flags),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
