//! The divide-and-conquer ensemble: four stage models with early-exit
//! routing, plus the flat seven-class baseline it is compared against.
//!
//! Routing follows a fixed emotion tree. Stage 1 separates *neutral* from
//! *emotional* and stops immediately on neutral. Stage 2 splits emotional
//! into *positive* and *negative*. Stage 3 resolves positive into
//! {happy, surprise} and negative into {angry, disgust, fear, sad}. Each
//! stage is an independently trained [`TrainedModel`] over the same feature
//! representation, and stage training sets are carved out of the ground-truth
//! labels, never out of upstream predictions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::EmotionLabel;
use crate::learners::{fit_model, LearnerConfig, LearnerError, TrainedModel};
use crate::num::Real;

/// Stage-1 vocabulary, in label-index order.
pub const STAGE1_LABELS: [&str; 2] = ["neutral", "emotional"];
/// Stage-2 vocabulary, in label-index order.
pub const STAGE2_LABELS: [&str; 2] = ["positive", "negative"];
/// Stage-3 positive vocabulary, in label-index order.
pub const STAGE3P_LABELS: [&str; 2] = ["happy", "surprise"];
/// Stage-3 negative vocabulary, in label-index order.
pub const STAGE3N_LABELS: [&str; 4] = ["angry", "disgust", "fear", "sad"];

/// Errors from training or applying cascade and flat models.
#[derive(Debug)]
pub enum CascadeError {
    /// The training set lacks one of the seven emotions.
    MissingClass { label: EmotionLabel },
    /// Features were extracted under a different MFCC configuration than the
    /// model was trained with.
    ConfigMismatch { expected: String, got: String },
    /// An underlying learner failed.
    Learner(LearnerError),
}

impl fmt::Display for CascadeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CascadeError::MissingClass { label } => {
                write!(f, "training set has no '{}' samples", label.as_str())
            }
            CascadeError::ConfigMismatch { expected, got } => write!(
                f,
                "feature fingerprint mismatch: model was trained with {expected}, input was extracted with {got}"
            ),
            CascadeError::Learner(e) => write!(f, "learner error: {e}"),
        }
    }
}

impl std::error::Error for CascadeError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CascadeError::Learner(e) => Some(e),
            _ => None,
        }
    }
}

impl From<LearnerError> for CascadeError {
    fn from(e: LearnerError) -> Self {
        CascadeError::Learner(e)
    }
}

/// One of the four cascade stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StageId {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3P")]
    ThreePositive,
    #[serde(rename = "3N")]
    ThreeNegative,
}

impl StageId {
    pub const ALL: [StageId; 4] = [
        StageId::One,
        StageId::Two,
        StageId::ThreePositive,
        StageId::ThreeNegative,
    ];

    /// The stage's label vocabulary, in label-index order.
    pub fn vocabulary(self) -> &'static [&'static str] {
        match self {
            StageId::One => &STAGE1_LABELS,
            StageId::Two => &STAGE2_LABELS,
            StageId::ThreePositive => &STAGE3P_LABELS,
            StageId::ThreeNegative => &STAGE3N_LABELS,
        }
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageId::One => "1",
            StageId::Two => "2",
            StageId::ThreePositive => "3P",
            StageId::ThreeNegative => "3N",
        })
    }
}

/// Maps a ground-truth emotion onto a stage's vocabulary, or `None` when the
/// emotion never reaches that stage (used to carve out stage training sets).
///
/// Stage 1 sees everything (neutral vs. the rest). Stage 2 sees the six
/// emotional labels as positive ({happy, surprise}) or negative
/// ({angry, disgust, fear, sad}). The stage-3 mappings are identities on
/// their own vocabularies.
pub fn relabel_for_stage(label: EmotionLabel, stage: StageId) -> Option<&'static str> {
    use EmotionLabel::*;
    match stage {
        StageId::One => Some(if label == Neutral { "neutral" } else { "emotional" }),
        StageId::Two => match label {
            Neutral => None,
            Happy | Surprise => Some("positive"),
            Angry | Disgust | Fear | Sad => Some("negative"),
        },
        StageId::ThreePositive => matches!(label, Happy | Surprise).then(|| label.as_str()),
        StageId::ThreeNegative => {
            matches!(label, Angry | Disgust | Fear | Sad).then(|| label.as_str())
        }
    }
}

/// Learner choice for each cascade stage.
///
/// The default (and the configuration the reference results use) is
/// homogeneous — the same learner everywhere — but stages may differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    pub m1: LearnerConfig,
    pub m2: LearnerConfig,
    pub m3p: LearnerConfig,
    pub m3n: LearnerConfig,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig::homogeneous(LearnerConfig::default())
    }
}

impl CascadeConfig {
    /// The same learner configuration at every stage.
    pub fn homogeneous(config: LearnerConfig) -> Self {
        CascadeConfig {
            m1: config.clone(),
            m2: config.clone(),
            m3p: config.clone(),
            m3n: config,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        self.m1.validate()?;
        self.m2.validate()?;
        self.m3p.validate()?;
        self.m3n.validate()
    }

    /// Re-seeds every seeded stage learner.
    pub fn with_seed(&self, seed: u64) -> Self {
        CascadeConfig {
            m1: self.m1.with_seed(seed),
            m2: self.m2.with_seed(seed),
            m3p: self.m3p.with_seed(seed),
            m3n: self.m3n.with_seed(seed),
        }
    }
}

/// The four-stage divide-and-conquer model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel<T> {
    pub config: CascadeConfig,
    /// Stage 1: neutral vs. emotional.
    pub m1: TrainedModel<T>,
    /// Stage 2: positive vs. negative.
    pub m2: TrainedModel<T>,
    /// Stage 3 on the positive branch: happy vs. surprise.
    pub m3p: TrainedModel<T>,
    /// Stage 3 on the negative branch: angry / disgust / fear / sad.
    pub m3n: TrainedModel<T>,
    /// Fingerprint of the MFCC configuration the training features came
    /// from; predictions must come from identically configured features.
    pub feature_fingerprint: String,
}

/// One routing step of a cascade prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStep<T> {
    pub stage: StageId,
    /// The stage vocabulary entry the stage model chose.
    pub decision: String,
    /// The chosen entry's score from that stage's model, in [0, 1].
    pub confidence: T,
}

/// A cascade decision with its routing path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadePrediction<T> {
    pub label: EmotionLabel,
    /// One step for stage 1 alone (neutral early exit) or three steps for a
    /// full route to a stage-3 label.
    pub path: Vec<StageStep<T>>,
    /// Product of the path's stage confidences.
    pub confidence: T,
}

impl<T: Real> CascadeModel<T> {
    /// Feature dimension shared by all four stage models.
    pub fn dim(&self) -> usize {
        self.m1.dim()
    }

    /// Fails with [`CascadeError::ConfigMismatch`] unless `fingerprint`
    /// matches the fingerprint the model was trained under.
    pub fn verify_fingerprint(&self, fingerprint: &str) -> Result<(), CascadeError> {
        if self.feature_fingerprint != fingerprint {
            return Err(CascadeError::ConfigMismatch {
                expected: self.feature_fingerprint.clone(),
                got: fingerprint.to_string(),
            });
        }
        Ok(())
    }

    /// Routes `x` through the cascade.
    pub fn predict(&self, x: &[T]) -> Result<CascadePrediction<T>, CascadeError> {
        self.predict_with_probe(x, |_| {})
    }

    /// [`predict`](Self::predict) with an observer called with each stage id
    /// immediately before that stage's model runs, so tests can verify the
    /// early-exit contract: a neutral decision at stage 1 invokes nothing
    /// downstream.
    pub fn predict_with_probe(
        &self,
        x: &[T],
        mut probe: impl FnMut(StageId),
    ) -> Result<CascadePrediction<T>, CascadeError> {
        probe(StageId::One);
        let p1 = self.m1.predict(x)?;
        let mut path = vec![StageStep {
            stage: StageId::One,
            decision: self.m1.label_name(p1.label_index).to_string(),
            confidence: p1.confidence(),
        }];
        if self.m1.label_name(p1.label_index) == "neutral" {
            return Ok(CascadePrediction {
                label: EmotionLabel::Neutral,
                confidence: p1.confidence(),
                path,
            });
        }

        probe(StageId::Two);
        let p2 = self.m2.predict(x)?;
        let positive = self.m2.label_name(p2.label_index) == "positive";
        path.push(StageStep {
            stage: StageId::Two,
            decision: self.m2.label_name(p2.label_index).to_string(),
            confidence: p2.confidence(),
        });

        let (stage3, model) = if positive {
            (StageId::ThreePositive, &self.m3p)
        } else {
            (StageId::ThreeNegative, &self.m3n)
        };
        probe(stage3);
        let p3 = model.predict(x)?;
        let name = model.label_name(p3.label_index);
        let label: EmotionLabel = name
            .parse()
            .expect("stage-3 vocabularies hold emotion names");
        path.push(StageStep {
            stage: stage3,
            decision: name.to_string(),
            confidence: p3.confidence(),
        });

        let confidence = path
            .iter()
            .fold(T::one(), |acc, step| acc * step.confidence);
        Ok(CascadePrediction { label, path, confidence })
    }
}

/// Verifies all seven emotions are present, returning the first absent one
/// (in label-index order) as `MissingClass`.
fn check_all_classes_present(y: &[EmotionLabel]) -> Result<(), CascadeError> {
    let mut seen = [false; EmotionLabel::ALL.len()];
    for &label in y {
        seen[label.index()] = true;
    }
    match EmotionLabel::ALL.iter().find(|l| !seen[l.index()]) {
        Some(&label) => Err(CascadeError::MissingClass { label }),
        None => Ok(()),
    }
}

/// Trains one stage model on the rows whose ground-truth label belongs to
/// the stage, relabeled into the stage vocabulary.
fn fit_stage<T: Real>(
    x: &[Vec<T>],
    y: &[EmotionLabel],
    stage: StageId,
    config: &LearnerConfig,
) -> Result<TrainedModel<T>, CascadeError> {
    let vocab = stage.vocabulary();
    let mut sx: Vec<Vec<T>> = Vec::new();
    let mut sy: Vec<usize> = Vec::new();
    for (row, &label) in x.iter().zip(y) {
        if let Some(name) = relabel_for_stage(label, stage) {
            let index = vocab
                .iter()
                .position(|&v| v == name)
                .expect("relabel output is in the stage vocabulary");
            sx.push(row.clone());
            sy.push(index);
        }
    }
    let labels = vocab.iter().map(|&v| v.to_string()).collect();
    Ok(fit_model(&sx, &sy, labels, config)?)
}

/// Trains the four stage models from ground-truth routing.
///
/// Every stage's training set is derived from the true labels: stage 1 sees
/// all rows, stage 2 the emotional rows, and each stage-3 model its own
/// branch. All seven emotions must be present.
///
/// `feature_fingerprint` identifies the feature extraction configuration and
/// is stored for [`CascadeModel::verify_fingerprint`].
pub fn train_cascade<T: Real>(
    x: &[Vec<T>],
    y: &[EmotionLabel],
    config: &CascadeConfig,
    feature_fingerprint: impl Into<String>,
) -> Result<CascadeModel<T>, CascadeError> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(LearnerError::DimensionMismatch { expected: x.len(), got: y.len() }.into());
    }
    check_all_classes_present(y)?;
    Ok(CascadeModel {
        config: config.clone(),
        m1: fit_stage(x, y, StageId::One, &config.m1)?,
        m2: fit_stage(x, y, StageId::Two, &config.m2)?,
        m3p: fit_stage(x, y, StageId::ThreePositive, &config.m3p)?,
        m3n: fit_stage(x, y, StageId::ThreeNegative, &config.m3n)?,
        feature_fingerprint: feature_fingerprint.into(),
    })
}

/// Trains the flat seven-class baseline over the same features.
///
/// The vocabulary is the seven emotions in canonical label-index order; all
/// seven must be present.
pub fn train_flat<T: Real>(
    x: &[Vec<T>],
    y: &[EmotionLabel],
    config: &LearnerConfig,
) -> Result<TrainedModel<T>, CascadeError> {
    if x.len() != y.len() {
        return Err(LearnerError::DimensionMismatch { expected: x.len(), got: y.len() }.into());
    }
    check_all_classes_present(y)?;
    let labels = EmotionLabel::ALL.iter().map(|l| l.as_str().to_string()).collect();
    let indices: Vec<usize> = y.iter().map(|l| l.index()).collect();
    Ok(fit_model(x, &indices, labels, config)?)
}

/// Classifies `x` with a flat baseline model.
pub fn predict_flat<T: Real>(
    model: &TrainedModel<T>,
    x: &[T],
) -> Result<(EmotionLabel, Vec<T>), CascadeError> {
    let p = model.predict(x)?;
    let label = EmotionLabel::from_index(p.label_index)
        .expect("flat vocabulary is the seven emotions in canonical order");
    Ok((label, p.scores))
}
