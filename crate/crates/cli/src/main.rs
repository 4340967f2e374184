mod convert;
mod failure;
mod metrics;
mod settings;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::{EXIT_CONFIG, EXIT_INTERNAL};

const EXIT_CODES: &str = "\
Exit status:
  0  success
  2  configuration error
  3  input or format error
  4  a declared scene assertion failed (synth)
  5  internal error
  6  no signal: the input produced no DVS events, so ratios are undefined

Errors are printed to standard error as one line: error[<kind>]: <message>";

/// Convert frame sequences into DVS events and OMS spikes and measure their bit rates.
#[derive(Parser, Debug)]
#[command(name = "omsense", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert frame directories to DVS and/or OMS outputs
    #[command(after_help = EXIT_CODES)]
    Convert(convert::ConvertArgs),
    /// Bit-rate and per-bit performance report as CSV
    #[command(after_help = EXIT_CODES)]
    Metrics(metrics::MetricsArgs),
    /// Render a synthetic scene and check ego-motion suppression
    #[command(after_help = EXIT_CODES)]
    Synth(synth::SynthArgs),
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        let message = info.to_string().replace('\n', " ");
        eprintln!("error[internal]: {message}");
        std::process::exit(EXIT_INTERNAL);
    }));

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let outcome = match &cli.command {
        Command::Convert(args) => convert::run(args),
        Command::Metrics(args) => metrics::run(args),
        Command::Synth(args) => synth::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let message = failure.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", failure.kind());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
