use std::process::ExitCode;

use clap::Parser;

mod analyze;
mod args;
mod calibrate;
mod eval;
mod images;
mod post;
mod serve;
mod simulate;
mod svg;

use args::{Cli, Command};

/// A bad combination of arguments that clap cannot express.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => simulate::run(g, a),
        Command::Serve(a) => serve::serve(g, a),
        Command::Replay(a) => serve::replay(g, a),
        Command::Analyze(a) => analyze::run(g, a),
        Command::ClassifyImage(a) => images::classify(g, a),
        Command::Detect(a) => images::detect(g, a),
        Command::EvalIou(a) => eval::run(a),
        Command::Calibrate(a) => calibrate::run(g, a),
    }
}
