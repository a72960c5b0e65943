use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rydberg_ramsey::config::{self, System};
use rydberg_ramsey::experiments::{exit_code, write_output, Experiment, Overrides, RunSpec, VALIDATION_FAILURE};
use rydberg_ramsey::ising::Normalization;
use rydberg_ramsey::units::GridSpec;
use rydberg_ramsey::Error;

#[derive(Parser)]
#[command(name = "ramsey", version, about = "Ramsey dynamics of Rydberg-dressed Ising spins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gas contrast with and without echo at two tipping angles.
    Fig2(Common),
    /// Half-time scaling with the blockade number.
    Fig3(Common),
    /// Square-lattice contrast and correlation maps.
    Fig4(Common),
    /// Bare-Rydberg density ratio and phase shift.
    Fig5(Common),
    /// One contrast trace of a gas or lattice.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        system: Option<SystemArg>,
    },
    /// Closed forms against the master-equation oracle and Monte Carlo.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with unit-suffixed parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// lin|log:start:stop:n; endpoints without units are V0t.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, overrides_with = "no_echo")]
    echo: bool,
    #[arg(long, overrides_with = "echo")]
    no_echo: bool,
    /// Tipping angle in radians.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    PerSpin,
    Total,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Gas,
    Lattice,
}

fn run(experiment: Experiment, common: Common, system: Option<System>) -> Result<i32, Error> {
    let config = match &common.config {
        Some(path) => config::load(path)?,
        None if experiment == Experiment::Validate => config::RawConfig::default().resolve()?,
        None => return Err(Error::Config(format!("{experiment} needs --config"))),
    };
    let overrides = Overrides {
        grid: common.grid.as_deref().map(str::parse::<GridSpec>).transpose()?,
        echo: match (common.echo, common.no_echo) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        },
        theta: common.theta,
        normalization: common.normalization.map(|n| match n {
            NormalizationArg::PerSpin => Normalization::PerSpin,
            NormalizationArg::Total => Normalization::Total,
        }),
        system,
    };
    let spec = RunSpec::new(experiment, config, overrides, common.out, common.seed)?;
    let output = spec.run()?;
    for path in write_output(&spec, &output)? {
        println!("{}", path.display());
    }
    Ok(if output.passed { 0 } else { VALIDATION_FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, common, system) = match cli.command {
        Command::Fig2(c) => (Experiment::Fig2, c, None),
        Command::Fig3(c) => (Experiment::Fig3, c, None),
        Command::Fig4(c) => (Experiment::Fig4, c, None),
        Command::Fig5(c) => (Experiment::Fig5, c, None),
        Command::Scan { common, system } => (
            Experiment::Scan,
            common,
            system.map(|s| match s {
                SystemArg::Gas => System::Gas,
                SystemArg::Lattice => System::Lattice,
            }),
        ),
        Command::Validate(c) => (Experiment::Validate, c, None),
    };
    let code = match run(experiment, common, system) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
