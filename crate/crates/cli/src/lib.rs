//! Command-line front end for the speech emotion recognition toolkit.
//!
//! The binary wires six subcommands — `synth`, `features`, `train`,
//! `predict`, `evaluate`, `compare` — to the `serkit` library crate, adding
//! the pieces only a tool needs: a mergeable run configuration, versioned
//! model files with atomic writes, and report files in both JSON and text.
//!
//! Exit codes: `0` success, `1` usage error, `2` data error, `3` internal
//! error.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod model_file;

pub use config::RunConfig;
pub use error::CliError;
pub use model_file::{ModelFile, ModelPayload, MODEL_FORMAT_VERSION};

use args::{Cli, Command};

/// Runs one parsed invocation to completion.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => commands::synth(args),
        Command::Features(args) => commands::features(args),
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Compare(args) => commands::compare(args),
    }
}
