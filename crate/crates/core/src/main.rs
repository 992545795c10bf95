use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pixel_modes::config::{parse_config, McConfig, ScenarioConfig};
use pixel_modes::photon::CoherencePolicy;
use pixel_modes::report::{
    render, render_constants, render_table1, reproduce_table1, run_scenario, run_sweep, Format,
};
use pixel_modes::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "pixel-modes", version, about = "Pixel étendue, mode count and quantum-limited SNR")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: FormatArg,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the coherence-scale policy from the config.
    #[arg(long, value_enum, global = true)]
    policy: Option<PolicyArg>,

    /// Override the Monte Carlo seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario.
    Run { config: PathBuf },
    /// Evaluate every point of the config's sweep axis.
    Sweep { config: PathBuf },
    /// Reproduce the reference mode-count table.
    Table1,
    /// Evaluate one scenario with the Monte Carlo verifier.
    Mc { config: PathBuf },
    /// Print the physical constants.
    Constants,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    MaxRule,
    RawLambda,
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn load(path: &Path, cli: &Cli) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::Lib(Error::Usage(format!("cannot read {}: {e}", path.display())))
    })?;
    let mut config = parse_config(&text).map_err(Error::from)?;
    if let Some(p) = cli.policy {
        config.coherence_policy = match p {
            PolicyArg::MaxRule => CoherencePolicy::MaxRule,
            PolicyArg::RawLambda => CoherencePolicy::RawMeasurementWavelength,
        };
    }
    if let (Some(seed), Some(mc)) = (cli.seed, config.mc.as_mut()) {
        mc.seed = seed;
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<Vec<u8>, Failure> {
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
        FormatArg::Md => Format::Markdown,
    };
    let bytes = match &cli.command {
        Command::Run { config } => {
            let mut config = load(config, cli)?;
            config.sweep = None;
            render(&[run_scenario(&config)?], format)?
        }
        Command::Sweep { config } => render(&run_sweep(&load(config, cli)?)?, format)?,
        Command::Mc { config } => {
            let mut config = load(config, cli)?;
            config.sweep = None;
            let mc = config.mc.get_or_insert_with(McConfig::default);
            if let Some(seed) = cli.seed {
                mc.seed = seed;
            }
            render(&[run_scenario(&config)?], format)?
        }
        Command::Table1 => render_table1(&reproduce_table1(), format)?,
        Command::Constants => render_constants(format)?,
    };
    Ok(bytes)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();

    let result = execute(&cli).and_then(|bytes| match &cli.out {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::Io(format!("cannot write report: {e}"))),
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Convergence { .. } => ExitCode::from(EXIT_CONVERGENCE),
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
