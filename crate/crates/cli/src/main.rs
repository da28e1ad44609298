//! `modal`: seed-deterministic front end to the modal-core engine.

mod cmd;
mod config;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{GlobalArgs, Settings};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "modal", version, about = "Actualization contexts, measurement and decoherence on finite-dimensional models")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clustered eigen-decomposition of a Hermitian matrix.
    Spectrum(cmd::spectral::SpectrumArgs),
    /// Preferred context of a system and definite-value verdicts.
    Context(cmd::spectral::ContextArgs),
    /// Measurement runs with pointer propensities and sampled frequencies.
    Measure(cmd::measure::MeasureArgs),
    /// Expectation-value dephasing on a discretized continuum.
    Decohere(cmd::dynamics::DecohereArgs),
    /// Wigner transform presets.
    Wigner(cmd::dynamics::WignerArgs),
    /// State reconstruction from sampled frequencies.
    Tomography(cmd::tomography::TomographyArgs),
    /// Scenario regression: exit 1 when a verdict differs from its table.
    Catalog(cmd::catalog::CatalogArgs),
    /// Approximate definiteness of position against mass.
    BornOppenheimer(cmd::catalog::BornOppenheimerArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let s = Settings::resolve(&cli.global)?;
    let report = match &cli.command {
        Command::Spectrum(a) => cmd::spectral::spectrum(a, &s)?,
        Command::Context(a) => cmd::spectral::context(a, &s)?,
        Command::Measure(a) => cmd::measure::measure(a, &s)?,
        Command::Decohere(a) => cmd::dynamics::decohere(a, &s)?,
        Command::Wigner(a) => cmd::dynamics::wigner(a, &s)?,
        Command::Tomography(a) => cmd::tomography::run(a, &s)?,
        Command::Catalog(a) => cmd::catalog::catalog(a, &s)?,
        Command::BornOppenheimer(a) => cmd::catalog::born_oppenheimer(a, &s)?,
    };
    output::emit(&report, &s)?;
    match report.failure {
        Some(msg) => Err(CliError::Assertion(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
