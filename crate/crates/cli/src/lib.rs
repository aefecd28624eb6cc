//! The `hitpredict` command line: ingest, label, train, evaluate, grid
//! search, synthesize and report.

pub mod args;
mod commands;
mod config;
pub mod error;
mod manifest;
mod output;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use config::expand_args;
pub use error::{CliError, EXIT_CONFIG, EXIT_OTHER, EXIT_SINGLE_CLASS, EXIT_TRANSPORT};
pub use manifest::{RunManifest, SplitSizes};

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    use args::Command;
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Label(a) => commands::label(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Gridsearch(a) => commands::gridsearch(a),
        Command::Synth(a) => commands::synth(a),
        Command::Report(a) => commands::report(a),
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_args(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
