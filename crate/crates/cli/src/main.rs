//! `gesi`: intelligibility prediction, hearing-loss simulation and stimulus
//! preparation from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BatchArgs, FitArgs, IrmArgs, MixArgs, PredictArgs, ReportArgs, ReverbArgs, SimulateArgs};
use config::Overrides;

/// An invalid invocation that clap itself cannot detect.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Parser)]
#[command(name = "gesi", version, about = "Speech intelligibility prediction for listeners with hearing loss")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one test signal against its clean reference
    Predict(PredictArgs),
    /// Score every row of a manifest
    Batch(BatchArgs),
    /// Calibrate the logistic mapping on measured scores and evaluate it
    Fit(FitArgs),
    /// Render a signal as heard by a listener with hearing loss
    Simulate(SimulateArgs),
    /// Mix speech and noise at a given SNR
    Mix(MixArgs),
    /// Enhance a mixture with the ideal ratio mask
    Irm(IrmArgs),
    /// Convolve a signal with a room impulse response
    Reverb(ReverbArgs),
    /// Write tables and SVG plots from a prediction table
    Report(ReportArgs),
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.overrides.resolve()?;
    match &cli.command {
        Command::Predict(a) => commands::predict_cmd(a, &cfg),
        Command::Batch(a) => commands::batch_cmd(a, &cfg),
        Command::Fit(a) => commands::fit_cmd(a, &cfg),
        Command::Simulate(a) => commands::simulate_cmd(a, &cfg),
        Command::Mix(a) => commands::mix_cmd(a, &cfg),
        Command::Irm(a) => commands::irm_cmd(a, &cfg),
        Command::Reverb(a) => commands::reverb_cmd(a, &cfg),
        Command::Report(a) => commands::report_cmd(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<Usage>()) {
        return 1;
    }
    match err.chain().find_map(|e| e.downcast_ref::<gesi_core::Error>()) {
        Some(gesi_core::Error::Config(_)) => 1,
        Some(e) if e.is_numeric() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_exit_codes() {
        let e = |x: gesi_core::Error| exit_code(&anyhow::Error::from(x).context("outer"));
        assert_eq!(e(gesi_core::Error::Config("c".into())), 1);
        assert_eq!(e(gesi_core::Error::Data("d".into())), 2);
        assert_eq!(e(gesi_core::Error::Numeric("n".into())), 3);
        assert_eq!(exit_code(&anyhow::Error::new(Usage("u".into()))), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 2);
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
