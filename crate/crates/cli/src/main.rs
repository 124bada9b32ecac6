//! `ornithopter`: simulations, force decomposition, hover optimization and
//! the validation battery from one configuration file.
//!
//! Exit status: 0 on success, 1 for configuration or I/O problems, 2 when a
//! run fails numerically (or `validate` reports a failing check). Log
//! verbosity comes from `ORNITHOPTER_LOG` (`error` .. `trace`, default
//! `info`).

mod commands;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ornithopter::morphology::InertiaMode;

#[derive(Parser, Debug)]
#[command(name = "ornithopter", version, about = "Four-wing flapping flight simulator", allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Arguments every subcommand takes.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration (TOML).
    pub config: PathBuf,
    /// Output directory; defaults to `output.dir` of the configuration.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Integration step in seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Run length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub inertia_mode: Option<InertiaArg>,
    /// Write every n-th step.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum InertiaArg {
    Rescaled,
    Tabulated,
}

impl From<InertiaArg> for InertiaMode {
    fn from(a: InertiaArg) -> Self {
        match a {
            InertiaArg::Rescaled => InertiaMode::Rescaled,
            InertiaArg::Tabulated => InertiaMode::Tabulated,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorqueArg {
    /// Torques that make the wings follow their prescribed waveforms.
    Recovered,
    /// No joint torques.
    Zero,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the 18-degree-of-freedom model.
    SimulateFull {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "recovered")]
        torque: TorqueArg,
    },
    /// Integrate the body under prescribed wing kinematics.
    SimulateReduced {
        #[command(flatten)]
        common: Common,
    },
    /// Split the body loads into aerodynamic, body and wing inertial parts.
    DecomposeForces {
        #[command(flatten)]
        common: Common,
    },
    /// Per-station and integrated wing loads over one period.
    WingForces {
        #[command(flatten)]
        common: Common,
        /// Time samples over the period.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Write the coefficient curves against angle of attack instead.
        #[arg(long)]
        sweep_alpha: bool,
    },
    /// Search the waveform parameters for hover.
    OptimizeHover {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
    },
    /// Run the invariant and oracle checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Shorter runs for a smoke test.
        #[arg(long)]
        quick: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ORNITHOPTER_LOG", "info"))
        .format_timestamp(None)
        .init();
    // usage errors are configuration errors (1), not clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::SimulateFull { common, torque } => commands::simulate_full(&common, torque),
        Command::SimulateReduced { common } => commands::simulate_reduced(&common),
        Command::DecomposeForces { common } => commands::decompose_forces(&common),
        Command::WingForces { common, samples, sweep_alpha } => commands::wing_forces(&common, samples, sweep_alpha),
        Command::OptimizeHover { common, generations, population } => {
            commands::optimize_hover(&common, generations, population)
        }
        Command::Validate { common, quick } => commands::validate(&common, quick),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
