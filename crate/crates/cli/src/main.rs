/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// `print!` counterpart of [`say!`].
macro_rules! say_raw {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::Common;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Config(_) => 1,
            CliError::Mismatch(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "swmhd", version, about = "Symmetry toolkit for rotating 1D shallow-water MHD")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recompute commutator and adjoint tables and compare with the shipped ones.
    Tables {
        /// free | gravity | coriolis | full (or a–d)
        #[arg(long)]
        case: Option<String>,
    },
    /// Check every generator of a case against the determining equations.
    Verify {
        #[arg(long)]
        case: Option<String>,
        /// Additional generators to test and report (e.g. X5).
        #[arg(long = "include", value_delimiter = ',')]
        include: Vec<String>,
    },
    /// Classify a generic element of the six-dimensional algebra.
    Optimal {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a10: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z3: f64,
        /// Also run the adjoint-invariance check with this many samples.
        #[arg(long)]
        invariance: Option<usize>,
    },
    /// Derive a similarity reduction and check its closed form.
    Reduce {
        #[arg(long)]
        case: Option<String>,
    },
    /// Integrate a reduced ODE (a reference run id or a reduction name).
    Integrate {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
    },
    /// Run the finite-volume solver.
    Simulate {
        /// x2-closed-form | rotating-closed-form | smooth | riemann | constant | galilean
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        convergence: Option<Vec<usize>>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
    },
    /// Run the whole verification pipeline and write a summary.
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    match cli.command {
        Command::Tables { case } => commands::tables(common.resolve(config::RunConfig { case, ..Default::default() })?),
        Command::Verify { case, include } => {
            commands::verify(common.resolve(config::RunConfig { case, ..Default::default() })?, &include)
        }
        Command::Optimal {
            a1,
            a2,
            a10,
            z1,
            z2,
            z3,
            invariance,
        } => {
            let element = swmhd_core::liealg::GenericElement { a1, a2, a10, z1, z2, z3 };
            commands::optimal(common.resolve(config::RunConfig::default())?, element, invariance)
        }
        Command::Reduce { case } => commands::reduce(common.resolve(config::RunConfig { case, ..Default::default() })?),
        Command::Integrate { case, rtol, atol } => commands::integrate(common.resolve(config::RunConfig {
            case,
            rtol,
            atol,
            ..Default::default()
        })?),
        Command::Simulate {
            init,
            cells,
            convergence,
            t_end,
            cfl,
        } => commands::simulate(common.resolve(config::RunConfig {
            init,
            cells,
            convergence,
            t_end,
            cfl,
            ..Default::default()
        })?),
        Command::Report => commands::report(common.resolve(config::RunConfig::default())?),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
