//! Run configuration: one JSON document that defaults, config files, and
//! command-line flags merge into, in that order of increasing priority.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serkit::cascade::CascadeConfig;
use serkit::corpus::{EmotionLabel, SynthSpec};
use serkit::eval::SplitSpec;
use serkit::learners::{ForestParams, LearnerConfig, LearnerKind, SvmParams, TreeParams};
use serkit::mfcc::MfccConfig;

use crate::error::CliError;

/// Everything a command needs beyond its input and output paths.
///
/// Every field has a default, so the empty document `{}` is a valid
/// configuration file. File values override the defaults; the `--seed` and
/// `--learner` flags override the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Feature extraction settings; together with the feature dimension they
    /// define the fingerprint that ties models to their features.
    pub mfcc: MfccConfig,
    /// Learner for flat models and, unless `cascade` says otherwise, for
    /// every cascade stage.
    pub learner: LearnerConfig,
    /// Optional per-stage learners; `None` means four copies of `learner`.
    pub cascade: Option<CascadeConfig>,
    /// Train/test split protocol for `evaluate` and `compare`.
    pub split: SplitSpec,
    /// Synthetic-corpus description for `synth`.
    pub synth: SynthSpec,
    /// Labels excluded from macro accuracy (still counted in the matrices).
    pub exclude: Vec<String>,
    /// Directory that receives outputs when a command's path flag is omitted.
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mfcc: MfccConfig::default(),
            learner: LearnerConfig::default(),
            cascade: None,
            split: SplitSpec::default(),
            synth: SynthSpec::default(),
            exclude: Vec::new(),
            out_dir: PathBuf::from("serkit-out"),
        }
    }
}

/// Default parameters for a learner kind, as picked by `--learner`.
pub fn default_learner(kind: LearnerKind) -> LearnerConfig {
    match kind {
        LearnerKind::Tree => LearnerConfig::Tree(TreeParams::default()),
        LearnerKind::Forest => LearnerConfig::Forest(ForestParams::default()),
        LearnerKind::Svm => LearnerConfig::Svm(SvmParams::default()),
    }
}

impl RunConfig {
    /// Loads a configuration file, or the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Loads, applies flag overrides, and validates in one step.
    ///
    /// `--learner` replaces the configured learner with that kind's default
    /// parameters and is applied before `--seed`, so the two flags compose.
    /// `--seed` reseeds everything at once: the learner (and any per-stage
    /// learners), the split, and the synthesizer.
    pub fn resolve(
        path: Option<&Path>,
        seed: Option<u64>,
        learner: Option<LearnerKind>,
    ) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::load(path)?;
        if let Some(kind) = learner {
            config.learner = default_learner(kind);
        }
        if let Some(seed) = seed {
            config.set_seed(seed);
        }
        config.validate()?;
        Ok(config)
    }

    /// Points every seeded component at `seed`.
    pub fn set_seed(&mut self, seed: u64) {
        self.learner = self.learner.with_seed(seed);
        self.cascade = self.cascade.as_ref().map(|c| c.with_seed(seed));
        self.split.seed = seed;
        self.synth.seed = seed;
    }

    /// The per-stage configuration cascade training uses: the explicit
    /// `cascade` section if present, otherwise the shared learner everywhere.
    pub fn cascade_config(&self) -> CascadeConfig {
        self.cascade
            .clone()
            .unwrap_or_else(|| CascadeConfig::homogeneous(self.learner.clone()))
    }

    /// Parses the `exclude` list into labels, rejecting unknown names.
    pub fn excluded_labels(&self) -> Result<Vec<EmotionLabel>, CliError> {
        self.exclude
            .iter()
            .map(|name| {
                name.parse().map_err(|()| {
                    CliError::usage(format!("unknown label \"{name}\" in exclude list"))
                })
            })
            .collect()
    }

    /// Checks every section that can be checked without data.
    ///
    /// MFCC settings are only fully checkable against a sample rate, so they
    /// are validated where audio is actually read.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: &dyn std::fmt::Display| CliError::usage(format!("invalid config: {e}"));
        self.learner.validate().map_err(|e| usage(&e))?;
        if let Some(cascade) = &self.cascade {
            cascade.validate().map_err(|e| usage(&e))?;
        }
        self.split.validate().map_err(|e| usage(&e))?;
        self.synth.validate().map_err(|e| usage(&e))?;
        self.excluded_labels()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write_config(json: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().expect("temp file");
        file.write_all(json.as_bytes()).expect("write config");
        file
    }

    #[test]
    fn empty_document_is_the_default_config() {
        let file = write_config("{}");
        let config = RunConfig::load(Some(file.path())).expect("load");
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.out_dir, PathBuf::from("serkit-out"));
        assert!(config.cascade.is_none());
    }

    #[test]
    fn file_values_override_defaults_and_flags_override_the_file() {
        let file = write_config(
            r#"{
                "learner": {"kind": "svm", "c": 4.0},
                "split": {"test_fraction": 0.4},
                "exclude": ["surprise"]
            }"#,
        );

        // File overrides defaults.
        let from_file = RunConfig::resolve(Some(file.path()), None, None).expect("resolve");
        assert_eq!(from_file.learner.kind(), LearnerKind::Svm);
        assert_eq!(from_file.split.test_fraction, 0.4);
        assert_eq!(from_file.exclude, vec!["surprise"]);

        // Flags override the file: the learner kind is replaced with its
        // defaults, and the seed threads through split and synth too.
        let flagged = RunConfig::resolve(Some(file.path()), Some(9), Some(LearnerKind::Forest))
            .expect("resolve");
        assert_eq!(flagged.learner, LearnerConfig::Forest(ForestParams { seed: 9, ..ForestParams::default() }));
        assert_eq!(flagged.split.seed, 9);
        assert_eq!(flagged.split.test_fraction, 0.4, "seeding must not touch other split fields");
        assert_eq!(flagged.synth.seed, 9);
    }

    #[test]
    fn seed_reaches_every_cascade_stage() {
        let mut config = RunConfig {
            cascade: Some(CascadeConfig::homogeneous(LearnerConfig::Svm(SvmParams::default()))),
            ..RunConfig::default()
        };
        config.set_seed(7);
        let cascade = config.cascade_config();
        let expected = LearnerConfig::Svm(SvmParams { seed: 7, ..SvmParams::default() });
        for stage in [&cascade.m1, &cascade.m2, &cascade.m3p, &cascade.m3n] {
            assert_eq!(stage, &expected);
        }
    }

    #[test]
    fn cascade_config_defaults_to_the_shared_learner() {
        let config = RunConfig::default();
        assert_eq!(config.cascade_config(), CascadeConfig::homogeneous(config.learner.clone()));
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        let file = write_config(r#"{"learners": {"kind": "tree"}}"#);
        let err = RunConfig::load(Some(file.path())).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("learners"), "message should name the bad key: {err}");
    }

    #[test]
    fn unknown_exclude_labels_are_rejected_by_name() {
        let file = write_config(r#"{"exclude": ["boredom"]}"#);
        let err = RunConfig::resolve(Some(file.path()), None, None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("boredom"), "got: {err}");
    }

    #[test]
    fn invalid_sections_are_usage_errors() {
        let file = write_config(r#"{"split": {"test_fraction": 1.5}}"#);
        let err = RunConfig::resolve(Some(file.path()), None, None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_config_file_is_a_usage_error_naming_the_path() {
        let err = RunConfig::load(Some(Path::new("/no/such/config.json"))).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("/no/such/config.json"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut config = RunConfig::default();
        config.set_seed(11);
        config.exclude = vec!["surprise".into()];
        let text = serde_json::to_string_pretty(&config).expect("serialize");
        let back: RunConfig = serde_json::from_str(&text).expect("parse");
        assert_eq!(back, config);
    }
}
