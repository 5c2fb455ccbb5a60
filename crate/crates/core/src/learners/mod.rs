//! From-scratch classifiers used at each cascade stage: a CART decision
//! tree, a random forest, and an RBF-kernel SVM trained by simplified SMO,
//! plus z-score standardization.
//!
//! Each learner is deterministic given its params (including seeds), and
//! every fitted model standardizes inputs with statistics fitted on its own
//! training data.

mod forest;
mod standardize;
mod svm;
mod tree;

pub use forest::{fit_forest, predict_forest};
pub use standardize::Standardizer;
pub use svm::{fit_svm_binary, fit_svm_multiclass, predict_svm, PairMachine, SvmBinary, SvmMulticlass};
pub use tree::{fit_tree, gini, predict_tree, TreeNode};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Errors from fitting or applying learners.
#[derive(Debug)]
pub enum LearnerError {
    /// Impurity requested for a node with no samples.
    EmptyNode,
    /// No training rows.
    EmptyTrainingSet,
    /// Row length or label count disagrees with the expectation.
    DimensionMismatch { expected: usize, got: usize },
    /// A binary SVM received only one of its two labels.
    SingleClass,
    /// Out-of-range hyperparameters, labels, or non-finite features.
    InvalidParams { detail: String },
}

impl fmt::Display for LearnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerError::EmptyNode => write!(f, "impurity of an empty node"),
            LearnerError::EmptyTrainingSet => write!(f, "training set is empty"),
            LearnerError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LearnerError::SingleClass => {
                write!(f, "binary training set contains only one class")
            }
            LearnerError::InvalidParams { detail } => write!(f, "invalid parameters: {detail}"),
        }
    }
}

impl std::error::Error for LearnerError {}

/// Decision tree hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// Maximum split depth; a node at this depth becomes a leaf.
    pub max_depth: usize,
    /// Minimum samples each child of a split must keep.
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 10, min_samples_leaf: 1 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(LearnerError::InvalidParams {
                detail: "max_depth and min_samples_leaf must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Feature-subset size drawn at every tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// floor(sqrt(dimension)), at least 1.
    Sqrt,
    /// Fixed subset size.
    #[serde(untagged)]
    Exact(usize),
}

/// Random forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub tree_params: TreeParams,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            tree_params: TreeParams::default(),
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.n_trees == 0 {
            return Err(LearnerError::InvalidParams {
                detail: "n_trees must be at least 1".into(),
            });
        }
        self.tree_params.validate()
    }
}

/// RBF kernel width: fixed, or 1/dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaParam {
    Auto,
    #[serde(untagged)]
    Value(f64),
}

impl GammaParam {
    /// Resolves against the feature dimension.
    pub fn resolve(self, dim: usize) -> f64 {
        match self {
            GammaParam::Auto => 1.0 / dim.max(1) as f64,
            GammaParam::Value(v) => v,
        }
    }
}

/// SVM hyperparameters (soft margin + simplified SMO).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Box constraint.
    pub c: f64,
    pub gamma: GammaParam,
    /// KKT tolerance.
    pub tol: f64,
    /// Update-free sweeps before the terminating KKT audit.
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: GammaParam::Auto,
            tol: 1e-3,
            max_passes: 10,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |detail: &str| Err(LearnerError::InvalidParams { detail: detail.into() });
        if self.c <= 0.0 || !self.c.is_finite() {
            return bad("c must be positive and finite");
        }
        if let GammaParam::Value(v) = self.gamma {
            if v <= 0.0 || !v.is_finite() {
                return bad("gamma must be positive and finite");
            }
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return bad("tol must be positive and finite");
        }
        if self.max_passes == 0 {
            return bad("max_passes must be at least 1");
        }
        Ok(())
    }
}

/// Which learner a config or model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Tree,
    Forest,
    Svm,
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearnerKind::Tree => "tree",
            LearnerKind::Forest => "forest",
            LearnerKind::Svm => "svm",
        })
    }
}

/// A learner choice with its hyperparameters, e.g.
/// `{"kind": "forest", "n_trees": 100}` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerConfig {
    Tree(TreeParams),
    Forest(ForestParams),
    Svm(SvmParams),
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig::Forest(ForestParams::default())
    }
}

impl LearnerConfig {
    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerConfig::Tree(_) => LearnerKind::Tree,
            LearnerConfig::Forest(_) => LearnerKind::Forest,
            LearnerConfig::Svm(_) => LearnerKind::Svm,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        match self {
            LearnerConfig::Tree(p) => p.validate(),
            LearnerConfig::Forest(p) => p.validate(),
            LearnerConfig::Svm(p) => p.validate(),
        }
    }

    /// The same config with its seed replaced (no-op for trees, which draw
    /// nothing).
    pub fn with_seed(&self, seed: u64) -> Self {
        match self.clone() {
            LearnerConfig::Tree(p) => LearnerConfig::Tree(p),
            LearnerConfig::Forest(p) => LearnerConfig::Forest(ForestParams { seed, ..p }),
            LearnerConfig::Svm(p) => LearnerConfig::Svm(SvmParams { seed, ..p }),
        }
    }
}

/// Kind-specific fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelPayload<T> {
    Tree { root: TreeNode<T> },
    Forest { trees: Vec<TreeNode<T>> },
    Svm { svm: SvmMulticlass<T> },
}

/// A prediction over a model's label vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    /// Index into the model's vocabulary.
    pub label_index: usize,
    /// Per-label scores summing to 1 (tree: leaf proportions; forest: vote
    /// fractions; SVM: pairwise-vote shares).
    pub scores: Vec<T>,
}

impl<T: Real> Prediction<T> {
    /// Score of the predicted label.
    pub fn confidence(&self) -> T {
        self.scores[self.label_index]
    }
}

/// A fitted classifier: label vocabulary, input standardizer, and the
/// kind-specific payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel<T> {
    pub labels: Vec<String>,
    pub standardizer: Standardizer<T>,
    pub payload: ModelPayload<T>,
}

impl<T: Real> TrainedModel<T> {
    pub fn kind(&self) -> LearnerKind {
        match &self.payload {
            ModelPayload::Tree { .. } => LearnerKind::Tree,
            ModelPayload::Forest { .. } => LearnerKind::Forest,
            ModelPayload::Svm { .. } => LearnerKind::Svm,
        }
    }

    /// Feature dimension the model was trained on.
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    /// Name of a vocabulary entry.
    pub fn label_name(&self, index: usize) -> &str {
        &self.labels[index]
    }

    /// Standardizes `x` and classifies it.
    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>, LearnerError> {
        if x.len() != self.dim() {
            return Err(LearnerError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z = self.standardizer.apply(x);
        let (label_index, scores) = match &self.payload {
            ModelPayload::Tree { root } => predict_tree(root, &z)?,
            ModelPayload::Forest { trees } => predict_forest(trees, self.n_classes(), &z)?,
            ModelPayload::Svm { svm } => predict_svm(svm, &z)?,
        };
        Ok(Prediction { label_index, scores })
    }
}

/// Standardizes the training matrix and fits the configured learner.
///
/// `y` holds indices into `labels`; every index must be in range and the
/// vocabulary must name at least two classes.
pub fn fit_model<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    labels: Vec<String>,
    config: &LearnerConfig,
) -> Result<TrainedModel<T>, LearnerError> {
    config.validate()?;
    if labels.len() < 2 {
        return Err(LearnerError::InvalidParams {
            detail: format!("vocabulary needs at least 2 labels, got {}", labels.len()),
        });
    }
    if x.len() != y.len() {
        return Err(LearnerError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let n_classes = labels.len();
    let standardizer = Standardizer::fit(x)?;
    let z = standardizer.apply_matrix(x);
    let payload = match config {
        LearnerConfig::Tree(params) => ModelPayload::Tree {
            root: fit_tree(&z, y, n_classes, params, None)?,
        },
        LearnerConfig::Forest(params) => ModelPayload::Forest {
            trees: fit_forest(&z, y, n_classes, params)?,
        },
        LearnerConfig::Svm(params) => ModelPayload::Svm {
            svm: fit_svm_multiclass(&z, y, n_classes, params)?,
        },
    };
    Ok(TrainedModel { labels, standardizer, payload })
}
