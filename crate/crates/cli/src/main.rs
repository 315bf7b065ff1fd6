//! `diagssm`: kernels, bases, spectra, convolutions and self-checks for
//! diagonal state space models.
//!
//! Exit status: 0 on success, 1 on runtime errors or failed checks, 2 on
//! usage errors.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diagssm::memtrack::CountingAlloc;

mod commands;
mod config;
mod output;
mod probes;

use commands::{BasisCmd, BenchCmd, ConvCmd, KernelCmd, SpectrumCmd, Status, VerifyCmd};
use config::UsageError;

#[global_allocator]
static GLOBAL: CountingAlloc = CountingAlloc;

#[derive(Parser, Debug)]
#[command(name = "diagssm", version, about = "Diagonal state space model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convolution kernel of a diagonal SSM as an `l,value` series.
    Kernel(KernelCmd),
    /// Sampled basis functions exp(tA)B.
    Basis(BasisCmd),
    /// Stored (nonnegative-frequency) eigenvalues of an initialization.
    Spectrum(SpectrumCmd),
    /// Run an input signal through the model.
    Conv(ConvCmd),
    /// Numerical self-checks; prints a JSON array of probe results.
    Verify(VerifyCmd),
    /// Time and heap use of materialized vs streaming kernels.
    Bench(BenchCmd),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Kernel(c) => commands::kernel(c),
        Command::Basis(c) => commands::basis(c),
        Command::Spectrum(c) => commands::spectrum(c),
        Command::Conv(c) => commands::conv(c),
        Command::Verify(c) => commands::verify(c),
        Command::Bench(c) => commands::bench(c),
    };
    match outcome {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
