//! Versioned on-disk model format: a single JSON document carrying the
//! trained model together with everything needed to use it honestly — the
//! exact feature settings it was trained under and their fingerprint.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serkit::cascade::CascadeModel;
use serkit::learners::{LearnerConfig, TrainedModel};
use serkit::mfcc::MfccConfig;

use crate::error::CliError;

/// Bumped on any incompatible schema change; loading rejects other values.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// `name version` string recorded in every model file.
pub fn tool_version() -> String {
    format!("serkit {}", env!("CARGO_PKG_VERSION"))
}

/// The trained model itself, tagged by prediction mode.
///
/// A cascade model embeds its own stage configurations; a flat model does
/// not, so its learner configuration rides along for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ModelPayload {
    // Boxed so the two variants stay close in size; serde is unaffected.
    Cascade { model: Box<CascadeModel<f64>> },
    Flat { config: LearnerConfig, model: TrainedModel<f64> },
}

impl ModelPayload {
    pub fn mode_name(&self) -> &'static str {
        match self {
            ModelPayload::Cascade { .. } => "cascade",
            ModelPayload::Flat { .. } => "flat",
        }
    }
}

/// One saved model plus its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    /// Tool name and version that wrote the file.
    pub created_with: String,
    /// Seed of the first-stage (or flat) learner, recorded for provenance;
    /// the configurations embedded in the payload are authoritative.
    pub seed: u64,
    /// Feature settings the training features were extracted with. Predict
    /// re-extracts with the run configuration and both fingerprints must
    /// match.
    pub mfcc_config: MfccConfig,
    pub feature_fingerprint: String,
    pub payload: ModelPayload,
}

/// Seed recorded from a learner configuration (trees take none).
pub fn learner_seed(config: &LearnerConfig) -> u64 {
    match config {
        LearnerConfig::Tree(_) => 0,
        LearnerConfig::Forest(p) => p.seed,
        LearnerConfig::Svm(p) => p.seed,
    }
}

/// Just enough structure to check the version before decoding the rest, so
/// a file from a future schema fails with its version, not a parse error.
#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

impl ModelFile {
    /// Writes the model atomically: serialize to a temporary file in the
    /// destination directory, then rename over the target, so a crash or
    /// full disk never leaves a torn model behind.
    ///
    /// Serialization is deterministic — no timestamps, stable field order —
    /// so identical models produce byte-identical files.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::internal(format!("cannot serialize model: {e}")))?;
        json.push('\n');

        let dir = match path.parent() {
            Some(parent) if !parent.as_os_str().is_empty() => parent,
            _ => Path::new("."),
        };
        fs::create_dir_all(dir)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
        let file_name = path
            .file_name()
            .ok_or_else(|| CliError::usage(format!("{} is not a file path", path.display())))?;
        let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));

        fs::write(&tmp, json)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", tmp.display())))?;
        fs::rename(&tmp, path).map_err(|e| {
            let _ = fs::remove_file(&tmp);
            CliError::data(format!("cannot write {}: {e}", path.display()))
        })
    }

    /// Reads and validates a model file.
    pub fn load(path: &Path) -> Result<ModelFile, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read model {}: {e}", path.display())))?;
        let probe: VersionProbe = serde_json::from_str(&text).map_err(|e| {
            CliError::data(format!("{} is not a model file: {e}", path.display()))
        })?;
        if probe.format_version != MODEL_FORMAT_VERSION {
            return Err(CliError::data(format!(
                "model {} has format version {}, but this build reads version {}",
                path.display(),
                probe.format_version,
                MODEL_FORMAT_VERSION
            )));
        }
        serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("malformed model {}: {e}", path.display())))
    }

    /// Rejects features that were not extracted under this model's settings.
    pub fn verify_fingerprint(&self, got: &str) -> Result<(), CliError> {
        if self.feature_fingerprint == got {
            return Ok(());
        }
        Err(CliError::data(format!(
            "feature fingerprint mismatch: model was trained with {}, input was extracted with {}",
            self.feature_fingerprint, got
        )))
    }
}
