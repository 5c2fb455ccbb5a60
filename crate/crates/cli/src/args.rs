//! Command-line definitions: subcommands, flags, and help text.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serkit::learners::LearnerKind;

use crate::config::RunConfig;
use crate::error::CliError;

/// Speech emotion recognition: MFCC features and a staged classifier
/// cascade, with a flat baseline for comparison.
#[derive(Debug, Parser)]
#[command(name = "serkit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled corpus and print its manifest path.
    Synth(SynthArgs),
    /// Extract pooled MFCC features for every manifest entry into one CSV.
    Features(FeaturesArgs),
    /// Train a cascade or flat model and save it as a versioned JSON file.
    Train(TrainArgs),
    /// Classify a WAV file, or every row of a feature CSV, with a saved model.
    Predict(PredictArgs),
    /// Split, train a cascade, and report per-stage and end-to-end accuracy.
    Evaluate(EvaluateArgs),
    /// Train cascade and flat models on one split and report them side by side.
    Compare(CompareArgs),
}

/// Flags every subcommand understands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; individual flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override every seed at once (synthesis, split, learners).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Use this learner kind with its default parameters.
    #[arg(long, value_enum, value_name = "KIND")]
    pub learner: Option<LearnerArg>,
}

impl CommonArgs {
    /// Merged configuration: defaults, then the file, then these flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        RunConfig::resolve(self.config.as_deref(), self.seed, self.learner.map(LearnerArg::kind))
    }
}

/// Learner kinds selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Tree,
    Forest,
    Svm,
}

impl LearnerArg {
    pub fn kind(self) -> LearnerKind {
        match self {
            LearnerArg::Tree => LearnerKind::Tree,
            LearnerArg::Forest => LearnerKind::Forest,
            LearnerArg::Svm => LearnerKind::Svm,
        }
    }
}

/// Model topology to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Staged models: neutral gate, valence, then leaf emotions.
    Cascade,
    /// One 7-class model over the same features.
    Flat,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cascade => "cascade",
            Mode::Flat => "flat",
        })
    }
}

/// Where labeled feature rows come from: a feature CSV as-is, or a manifest
/// whose audio is extracted under the run configuration.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataInput {
    /// Feature CSV produced by `serkit features`.
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,
    /// Corpus manifest; features are extracted on the fly.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

/// What `predict` classifies.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PredictInput {
    /// A single WAV file.
    #[arg(long, value_name = "FILE")]
    pub wav: Option<PathBuf>,
    /// A feature CSV; every row is classified.
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for the WAV tree and manifest [default: <out_dir>/corpus].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override the configured number of utterances per class.
    #[arg(long, value_name = "N")]
    pub per_class: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Corpus manifest to extract features for.
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Output CSV [default: <out_dir>/features.csv].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Report undecodable files on stderr and continue instead of aborting.
    #[arg(long)]
    pub skip_errors: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: DataInput,
    /// Model topology to train.
    #[arg(long, value_enum, default_value_t = Mode::Cascade)]
    pub mode: Mode,
    /// Output model path [default: <out_dir>/<mode>-model.json].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Report undecodable files on stderr and continue instead of aborting.
    #[arg(long)]
    pub skip_errors: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Saved model file.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: PredictInput,
    /// Where to write the JSON records [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: DataInput,
    /// Output directory for the report files [default: <out_dir>/evaluation].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report undecodable files on stderr and continue instead of aborting.
    #[arg(long)]
    pub skip_errors: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: DataInput,
    /// Output directory for the report files [default: <out_dir>/comparison].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Report undecodable files on stderr and continue instead of aborting.
    #[arg(long)]
    pub skip_errors: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}
