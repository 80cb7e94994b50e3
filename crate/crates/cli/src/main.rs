mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use summalign_core::Error as CoreError;
use summalign_service::ServeError;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 2;
const EXIT_FORMAT: u8 = 3;
const EXIT_COMPUTE: u8 = 4;

/// Flag combinations clap cannot express.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return if e.is_format() || matches!(e, CoreError::Io(_)) {
                EXIT_FORMAT
            } else {
                EXIT_COMPUTE
            };
        }
        if let Some(e) = cause.downcast_ref::<ServeError>() {
            return match e {
                ServeError::MissingData(_) => EXIT_FORMAT,
                _ => EXIT_COMPUTE,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return EXIT_FORMAT;
        }
    }
    EXIT_COMPUTE
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build_global()?;
    match &cli.command {
        Command::Segment(a) => commands::segment(a),
        Command::Align(a) => commands::align(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Summarize(a) => commands::summarize_cmd(a),
        Command::TrainRef(a) => commands::train_ref(a),
        Command::Stats(a) => commands::stats(a),
        Command::Serve(a) => commands::serve(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            if code == EXIT_USAGE {
                eprintln!("error: {err:#}\n\nFor more information, try '--help'.");
            } else {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(code)
        }
    }
}
