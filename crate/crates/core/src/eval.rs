//! Dataset splitting and evaluation reports: confusion matrices, per-stage
//! accuracies under ground-truth routing, macro accuracy with optional class
//! exclusions, and the cascade-vs-flat comparison.
//!
//! Two routing views coexist deliberately. *Stage reports* evaluate each
//! stage model on the test samples that truly belong to that stage, so an
//! upstream mistake never contaminates a downstream stage's number.
//! The *end-to-end confusion matrix* instead follows predicted routing, so
//! upstream mistakes do propagate. Both are reported.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{
    predict_flat, relabel_for_stage, CascadeConfig, CascadeError, CascadeModel, StageId,
};
use crate::corpus::EmotionLabel;
use crate::learners::{LearnerConfig, LearnerError, TrainedModel};
use crate::num::Real;

/// Errors from splitting or evaluation.
#[derive(Debug)]
pub enum EvalError {
    /// A malformed [`SplitSpec`].
    InvalidSpec { detail: String },
    /// Not enough samples to keep both sides of the split nonempty.
    TooFewSamples { detail: String },
    /// Speaker-out splitting needs at least two distinct speakers.
    TooFewSpeakers { got: usize },
    /// Paired inputs of different lengths.
    LengthMismatch { expected: usize, got: usize },
    /// A label outside the matrix vocabulary.
    UnknownLabel { label: String },
    /// A non-excluded class has no test samples, so its recall is undefined.
    EmptyClass { label: String },
    /// No test samples reach a stage under ground-truth routing.
    EmptyStage { stage: StageId },
    /// The two compared models were trained on differently configured
    /// features.
    ConfigMismatch { expected: String, got: String },
    /// An underlying model application failed.
    Learner(LearnerError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::InvalidSpec { detail } => write!(f, "invalid split spec: {detail}"),
            EvalError::TooFewSamples { detail } => write!(f, "too few samples: {detail}"),
            EvalError::TooFewSpeakers { got } => {
                write!(f, "leave-one-speaker-out needs at least 2 speakers, got {got}")
            }
            EvalError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            EvalError::UnknownLabel { label } => {
                write!(f, "label '{label}' is not in the vocabulary")
            }
            EvalError::EmptyClass { label } => {
                write!(f, "class '{label}' has no samples; exclude it or enlarge the test set")
            }
            EvalError::EmptyStage { stage } => {
                write!(f, "no test samples reach stage {stage} under ground-truth routing")
            }
            EvalError::ConfigMismatch { expected, got } => write!(
                f,
                "feature fingerprint mismatch between compared models: {expected} vs {got}"
            ),
            EvalError::Learner(e) => write!(f, "learner error: {e}"),
        }
    }
}

impl std::error::Error for EvalError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            EvalError::Learner(e) => Some(e),
            _ => None,
        }
    }
}

impl From<LearnerError> for EvalError {
    fn from(e: LearnerError) -> Self {
        EvalError::Learner(e)
    }
}

/// Maps prediction-time cascade failures onto eval errors. Training-only
/// variants cannot occur here but the conversion stays total.
fn from_cascade(e: CascadeError) -> EvalError {
    match e {
        CascadeError::ConfigMismatch { expected, got } => {
            EvalError::ConfigMismatch { expected, got }
        }
        CascadeError::Learner(e) => EvalError::Learner(e),
        CascadeError::MissingClass { label } => EvalError::Learner(LearnerError::InvalidParams {
            detail: format!("missing class '{}'", label.as_str()),
        }),
    }
}

/// How to carve a dataset into train and test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Seeded random subsets (stratified by default).
    Random,
    /// Hold out every utterance of one speaker.
    LeaveOneSpeakerOut,
}

/// Split protocol: mode, test fraction, stratification, and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    /// Fraction of samples held out for testing (random mode), in (0, 1).
    pub test_fraction: f64,
    /// Preserve per-class proportions within ±1 sample (random mode).
    pub stratified: bool,
    pub mode: SplitMode,
    /// Random mode: shuffling seed. Speaker mode: selects the held-out
    /// speaker as `sorted_speakers[seed % n_speakers]`.
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.25,
            stratified: true,
            mode: SplitMode::Random,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(EvalError::InvalidSpec {
                detail: format!(
                    "test_fraction must be strictly between 0 and 1, got {}",
                    self.test_fraction
                ),
            });
        }
        Ok(())
    }
}

/// A train/test partition as index sets into the original dataset order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// The held-out speaker in leave-one-speaker-out mode.
    pub held_out_speaker: Option<String>,
}

/// Target test count for a group of `n` samples: the rounded fraction,
/// clamped so both sides keep at least one sample.
fn test_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
}

/// Deterministically partitions a dataset into train and test indices.
///
/// Random mode draws each class's test subset from its own seeded generator
/// stream, so one class's picks do not depend on which other classes are
/// present. Speaker mode holds out all utterances of one speaker, chosen by
/// the seed from the sorted distinct speaker ids; `test_fraction` and
/// `stratified` are ignored there.
pub fn stratified_split<S: AsRef<str>>(
    labels: &[EmotionLabel],
    speakers: &[S],
    spec: &SplitSpec,
) -> Result<SplitIndices, EvalError> {
    spec.validate()?;
    if speakers.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            expected: labels.len(),
            got: speakers.len(),
        });
    }

    match spec.mode {
        SplitMode::LeaveOneSpeakerOut => {
            let distinct: BTreeSet<&str> = speakers.iter().map(AsRef::as_ref).collect();
            if distinct.len() < 2 {
                return Err(EvalError::TooFewSpeakers { got: distinct.len() });
            }
            let sorted: Vec<&str> = distinct.into_iter().collect();
            let held_out = sorted[(spec.seed % sorted.len() as u64) as usize];
            let (test, train) = (0..labels.len())
                .partition(|&i| speakers[i].as_ref() == held_out);
            Ok(SplitIndices {
                train,
                test,
                held_out_speaker: Some(held_out.to_string()),
            })
        }
        SplitMode::Random if spec.stratified => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for &label in &EmotionLabel::ALL {
                let mut members: Vec<usize> = (0..labels.len())
                    .filter(|&i| labels[i] == label)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                if members.len() < 2 {
                    return Err(EvalError::TooFewSamples {
                        detail: format!(
                            "class '{}' has {} sample(s); a stratified split needs at least 2",
                            label.as_str(),
                            members.len()
                        ),
                    });
                }
                // One generator stream per class keeps class draws
                // independent of each other.
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(label.index() as u64);
                members.shuffle(&mut rng);
                let t = test_count(members.len(), spec.test_fraction);
                test.extend_from_slice(&members[..t]);
                train.extend_from_slice(&members[t..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Ok(SplitIndices { train, test, held_out_speaker: None })
        }
        SplitMode::Random => {
            let n = labels.len();
            if n < 2 {
                return Err(EvalError::TooFewSamples {
                    detail: format!("dataset has {n} sample(s); a split needs at least 2"),
                });
            }
            let mut all: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(EmotionLabel::ALL.len() as u64);
            all.shuffle(&mut rng);
            let t = test_count(n, spec.test_fraction);
            let (test_part, train_part) = all.split_at(t);
            let mut test = test_part.to_vec();
            let mut train = train_part.to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Ok(SplitIndices { train, test, held_out_speaker: None })
        }
    }
}

/// Formats a fraction as a percentage with one decimal place, dropping a
/// trailing `.0` ("100%", "73.3%").
pub fn fmt_pct(fraction: f64) -> String {
    let mut s = format!("{:.1}", fraction * 100.0);
    if let Some(stripped) = s.strip_suffix(".0") {
        s = stripped.to_string();
    }
    s.push('%');
    s
}

/// A labeled confusion matrix; rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// Counts truth/prediction pairs over an ordered vocabulary.
pub fn confusion_matrix<S1: AsRef<str>, S2: AsRef<str>, V: AsRef<str>>(
    truth: &[S1],
    predicted: &[S2],
    vocabulary: &[V],
) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let labels: Vec<String> = vocabulary.iter().map(|v| v.as_ref().to_string()).collect();
    let index_of = |name: &str| -> Result<usize, EvalError> {
        labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| EvalError::UnknownLabel { label: name.to_string() })
    };
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (t, p) in truth.iter().zip(predicted) {
        counts[index_of(t.as_ref())?][index_of(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    /// Number of test samples whose true label is row `i`.
    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Test-set size.
    pub fn total(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.row_total(i)).sum()
    }

    /// Per-class recall (diagonal over row total); `None` for empty rows.
    pub fn per_class_recall(&self) -> Vec<Option<f64>> {
        (0..self.n_classes())
            .map(|i| {
                let total = self.row_total(i);
                (total > 0).then(|| self.counts[i][i] as f64 / total as f64)
            })
            .collect()
    }

    /// Fraction of all samples on the diagonal (class-weighted accuracy).
    pub fn overall_accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let diag: u64 = (0..self.n_classes()).map(|i| self.counts[i][i]).sum();
        diag as f64 / total as f64
    }

    /// Unweighted mean of per-class recall over the non-excluded classes.
    ///
    /// Every excluded name must be in the vocabulary, and every non-excluded
    /// class must have at least one sample.
    pub fn macro_accuracy<S: AsRef<str>>(&self, exclude: &[S]) -> Result<f64, EvalError> {
        for name in exclude {
            if !self.labels.iter().any(|l| l == name.as_ref()) {
                return Err(EvalError::UnknownLabel { label: name.as_ref().to_string() });
            }
        }
        let mut sum = 0.0;
        let mut kept = 0usize;
        for (i, label) in self.labels.iter().enumerate() {
            if exclude.iter().any(|e| e.as_ref() == label) {
                continue;
            }
            let total = self.row_total(i);
            if total == 0 {
                return Err(EvalError::EmptyClass { label: label.clone() });
            }
            sum += self.counts[i][i] as f64 / total as f64;
            kept += 1;
        }
        if kept == 0 {
            return Err(EvalError::EmptyClass {
                label: "(all classes excluded)".to_string(),
            });
        }
        Ok(sum / kept as f64)
    }

    /// Row-normalized percentage table, one line per true label.
    pub fn render_percentages(&self) -> String {
        let header: Vec<String> = std::iter::once(String::new())
            .chain(self.labels.iter().cloned())
            .chain(std::iter::once("n".to_string()))
            .collect();
        let mut rows = vec![header];
        for (i, label) in self.labels.iter().enumerate() {
            let total = self.row_total(i);
            let mut row = vec![label.clone()];
            for j in 0..self.n_classes() {
                row.push(if total == 0 {
                    "-".to_string()
                } else {
                    fmt_pct(self.counts[i][j] as f64 / total as f64)
                });
            }
            row.push(total.to_string());
            rows.push(row);
        }
        render_table(&rows)
    }

    /// The raw counts as CSV: a header of predicted labels, then one row
    /// per true label.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = std::iter::once("label".to_string())
            .chain(self.labels.iter().cloned())
            .collect();
        writer.write_record(&header).expect("in-memory csv write");
        for (i, label) in self.labels.iter().enumerate() {
            let row: Vec<String> = std::iter::once(label.clone())
                .chain(self.counts[i].iter().map(u64::to_string))
                .collect();
            writer.write_record(&row).expect("in-memory csv write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory csv flush"))
            .expect("csv output is utf-8")
    }
}

/// Renders rows as an aligned table: first column left-aligned, the rest
/// right-aligned, two spaces between columns.
fn render_table(rows: &[Vec<String>]) -> String {
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; n_cols];
    for row in rows {
        for (j, cell) in row.iter().enumerate() {
            widths[j] = widths[j].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                line.push_str("  ");
            }
            if j == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[j]));
            } else {
                line.push_str(&format!("{cell:>width$}", width = widths[j]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// One stage's performance on its ground-truth-routed test subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: StageId,
    /// Confusion over the stage vocabulary, on the samples that truly
    /// belong to this stage.
    pub matrix: ConfusionMatrix,
    pub n_samples: usize,
}

impl StageReport {
    /// Class-weighted stage accuracy (diagonal fraction).
    pub fn overall_accuracy(&self) -> f64 {
        self.matrix.overall_accuracy()
    }

    /// Title line plus the stage's percentage table.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "Stage {} (n={}, overall {})\n",
            self.stage,
            self.n_samples,
            fmt_pct(self.overall_accuracy())
        );
        for line in self.matrix.render_percentages().lines() {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// Evaluates each stage model on the test samples that truly belong to its
/// stage, so upstream mistakes do not leak into downstream stage numbers.
///
/// Reports come back in stage order 1, 2, 3P, 3N. Every stage must receive
/// at least one sample.
pub fn stage_reports<T: Real>(
    model: &CascadeModel<T>,
    x: &[Vec<T>],
    y: &[EmotionLabel],
) -> Result<Vec<StageReport>, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let mut reports = Vec::with_capacity(StageId::ALL.len());
    for stage in StageId::ALL {
        let stage_model = match stage {
            StageId::One => &model.m1,
            StageId::Two => &model.m2,
            StageId::ThreePositive => &model.m3p,
            StageId::ThreeNegative => &model.m3n,
        };
        let mut truth: Vec<&'static str> = Vec::new();
        let mut predicted: Vec<String> = Vec::new();
        for (row, &label) in x.iter().zip(y) {
            let Some(stage_truth) = relabel_for_stage(label, stage) else {
                continue;
            };
            let p = stage_model.predict(row)?;
            truth.push(stage_truth);
            predicted.push(stage_model.label_name(p.label_index).to_string());
        }
        if truth.is_empty() {
            return Err(EvalError::EmptyStage { stage });
        }
        let matrix = confusion_matrix(&truth, &predicted, stage.vocabulary())?;
        reports.push(StageReport { stage, n_samples: truth.len(), matrix });
    }
    Ok(reports)
}

/// One arm (cascade or flat) of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub matrix: ConfusionMatrix,
    /// Recall per vocabulary entry; `None` where the class has no samples.
    pub per_class_recall: Vec<Option<f64>>,
    /// Unweighted mean recall over the non-excluded classes.
    pub macro_accuracy: f64,
}

/// Cascade and flat baseline evaluated on the identical test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub split: SplitSpec,
    pub cascade_config: CascadeConfig,
    pub flat_config: LearnerConfig,
    pub feature_fingerprint: String,
    /// Classes left out of both macro accuracies.
    pub excluded: Vec<String>,
    pub cascade: ArmReport,
    pub flat: ArmReport,
}

impl ComparisonReport {
    /// Cascade macro accuracy minus flat macro accuracy.
    pub fn macro_gap(&self) -> f64 {
        self.cascade.macro_accuracy - self.flat.macro_accuracy
    }

    /// Human-readable side-by-side report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Split: {}  seed={}  test_fraction={}  stratified={}\n",
            match self.split.mode {
                SplitMode::Random => "random",
                SplitMode::LeaveOneSpeakerOut => "leave-one-speaker-out",
            },
            self.split.seed,
            self.split.test_fraction,
            self.split.stratified,
        ));
        out.push_str(&format!("Features: {}\n", self.feature_fingerprint));
        if !self.excluded.is_empty() {
            out.push_str(&format!("Excluded from macro: {}\n", self.excluded.join(", ")));
        }
        for (title, config, arm) in [
            (
                "Cascade",
                serde_json::to_string(&self.cascade_config).expect("config serializes"),
                &self.cascade,
            ),
            (
                "Flat baseline",
                serde_json::to_string(&self.flat_config).expect("config serializes"),
                &self.flat,
            ),
        ] {
            out.push('\n');
            out.push_str(&format!(
                "{title}: macro accuracy {} (config {config})\n",
                fmt_pct(arm.macro_accuracy)
            ));
            out.push_str(&arm.matrix.render_percentages());
        }
        out.push_str(&format!("\nMacro gap (cascade - flat): {:+.1} pp\n", self.macro_gap() * 100.0));
        out
    }
}

fn arm_report<S: AsRef<str>>(
    truth: &[&'static str],
    predicted: &[String],
    exclude: &[S],
) -> Result<ArmReport, EvalError> {
    let vocabulary: Vec<&str> = EmotionLabel::ALL.iter().map(|l| l.as_str()).collect();
    let matrix = confusion_matrix(truth, predicted, &vocabulary)?;
    Ok(ArmReport {
        per_class_recall: matrix.per_class_recall(),
        macro_accuracy: matrix.macro_accuracy(exclude)?,
        matrix,
    })
}

/// Evaluates both models on the same test set and reports both confusion
/// matrices and macro accuracies.
///
/// `flat_fingerprint` is the feature fingerprint the flat model was trained
/// under; it must match the cascade's. `split` and `flat_config` are echoed
/// into the report.
#[allow(clippy::too_many_arguments)]
pub fn compare<T: Real>(
    cascade: &CascadeModel<T>,
    flat: &TrainedModel<T>,
    flat_fingerprint: &str,
    x: &[Vec<T>],
    y: &[EmotionLabel],
    split: &SplitSpec,
    flat_config: &LearnerConfig,
    exclude: &[EmotionLabel],
) -> Result<ComparisonReport, EvalError> {
    if cascade.feature_fingerprint != flat_fingerprint {
        return Err(EvalError::ConfigMismatch {
            expected: cascade.feature_fingerprint.clone(),
            got: flat_fingerprint.to_string(),
        });
    }
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { expected: x.len(), got: y.len() });
    }

    let truth: Vec<&'static str> = y.iter().map(|l| l.as_str()).collect();
    let excluded: Vec<String> = exclude.iter().map(|l| l.as_str().to_string()).collect();

    let mut cascade_pred = Vec::with_capacity(x.len());
    let mut flat_pred = Vec::with_capacity(x.len());
    for row in x {
        cascade_pred.push(
            cascade
                .predict(row)
                .map_err(from_cascade)?
                .label
                .as_str()
                .to_string(),
        );
        flat_pred.push(predict_flat(flat, row).map_err(from_cascade)?.0.as_str().to_string());
    }

    Ok(ComparisonReport {
        split: *split,
        cascade_config: cascade.config.clone(),
        flat_config: flat_config.clone(),
        feature_fingerprint: cascade.feature_fingerprint.clone(),
        excluded: excluded.clone(),
        cascade: arm_report(&truth, &cascade_pred, &excluded)?,
        flat: arm_report(&truth, &flat_pred, &excluded)?,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use crate::cascade::{train_cascade, train_flat};
    use crate::learners::{ForestParams, TreeParams};

    use super::*;

    fn labels_of(counts: &[(EmotionLabel, usize)]) -> Vec<EmotionLabel> {
        counts
            .iter()
            .flat_map(|&(label, n)| std::iter::repeat_n(label, n))
            .collect()
    }

    fn round_robin_speakers(n: usize, k: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{:02}", i % k + 1)).collect()
    }

    #[test]
    fn stratified_split_keeps_per_class_proportions_within_one() {
        use EmotionLabel::*;
        let labels = labels_of(&[(Angry, 10), (Happy, 10), (Neutral, 10), (Sad, 10)]);
        let speakers = round_robin_speakers(labels.len(), 4);
        let spec = SplitSpec::default();
        let split = stratified_split(&labels, &speakers, &spec).unwrap();

        assert_eq!(split.train.len() + split.test.len(), labels.len());
        let mut seen: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..labels.len()).collect::<Vec<_>>());

        for &label in &[Angry, Happy, Neutral, Sad] {
            let in_test = split.test.iter().filter(|&&i| labels[i] == label).count();
            // 10 samples at fraction 0.25 → 2.5 ± 1 sample.
            assert!((2..=3).contains(&in_test), "{label:?} test count {in_test}");
        }
        assert_eq!(split.held_out_speaker, None);
    }

    #[test]
    fn splits_are_deterministic_and_seed_sensitive() {
        use EmotionLabel::*;
        let labels = labels_of(&[(Angry, 12), (Happy, 12), (Neutral, 12)]);
        let speakers = round_robin_speakers(labels.len(), 3);
        let spec = SplitSpec::default();
        let a = stratified_split(&labels, &speakers, &spec).unwrap();
        let b = stratified_split(&labels, &speakers, &spec).unwrap();
        assert_eq!(a, b);

        let other = stratified_split(
            &labels,
            &speakers,
            &SplitSpec { seed: 1, ..spec },
        )
        .unwrap();
        assert_ne!(a.test, other.test);
    }

    #[test]
    fn class_draws_are_independent_of_other_classes() {
        use EmotionLabel::*;
        // The angry block occupies the same positions in both datasets; its
        // test picks must not depend on what else is present.
        let two = labels_of(&[(Angry, 12), (Happy, 12)]);
        let three = labels_of(&[(Angry, 12), (Happy, 12), (Sad, 12)]);
        let spec = SplitSpec::default();
        let a = stratified_split(&two, &round_robin_speakers(two.len(), 3), &spec).unwrap();
        let b = stratified_split(&three, &round_robin_speakers(three.len(), 3), &spec).unwrap();
        let angry_a: Vec<usize> = a.test.iter().copied().filter(|&i| i < 12).collect();
        let angry_b: Vec<usize> = b.test.iter().copied().filter(|&i| i < 12).collect();
        assert_eq!(angry_a, angry_b);
    }

    #[test]
    fn non_stratified_split_obeys_the_global_fraction() {
        use EmotionLabel::*;
        let labels = labels_of(&[(Angry, 7), (Happy, 13)]);
        let speakers = round_robin_speakers(labels.len(), 2);
        let spec = SplitSpec { stratified: false, ..SplitSpec::default() };
        let split = stratified_split(&labels, &speakers, &spec).unwrap();
        assert_eq!(split.test.len(), 5); // round(20 * 0.25)
        assert_eq!(split.train.len(), 15);
    }

    #[test]
    fn speaker_mode_holds_out_exactly_one_speaker() {
        use EmotionLabel::*;
        let labels = labels_of(&[(Angry, 8), (Happy, 8)]);
        let speakers = round_robin_speakers(labels.len(), 4); // s01..s04
        for seed in 0..8u64 {
            let spec = SplitSpec { mode: SplitMode::LeaveOneSpeakerOut, seed, ..SplitSpec::default() };
            let split = stratified_split(&labels, &speakers, &spec).unwrap();
            let expected = format!("s{:02}", seed % 4 + 1);
            assert_eq!(split.held_out_speaker.as_deref(), Some(expected.as_str()));
            assert!(split.test.iter().all(|&i| speakers[i] == expected));
            assert!(split.train.iter().all(|&i| speakers[i] != expected));
            assert_eq!(split.test.len(), 4);
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        use EmotionLabel::*;
        let labels = labels_of(&[(Angry, 5), (Happy, 1)]);
        let speakers = round_robin_speakers(labels.len(), 2);
        let err = stratified_split(&labels, &speakers, &SplitSpec::default()).unwrap_err();
        match &err {
            EvalError::TooFewSamples { detail } => assert!(detail.contains("happy")),
            other => panic!("expected TooFewSamples, got {other:?}"),
        }

        let one_speaker = vec!["solo".to_string(); labels.len()];
        let spec = SplitSpec { mode: SplitMode::LeaveOneSpeakerOut, ..SplitSpec::default() };
        assert!(matches!(
            stratified_split(&labels, &one_speaker, &spec),
            Err(EvalError::TooFewSpeakers { got: 1 })
        ));

        assert!(matches!(
            stratified_split(&labels, &speakers[..3], &SplitSpec::default()),
            Err(EvalError::LengthMismatch { .. })
        ));

        let bad = SplitSpec { test_fraction: 1.0, ..SplitSpec::default() };
        assert!(matches!(
            stratified_split(&labels, &speakers, &bad),
            Err(EvalError::InvalidSpec { .. })
        ));
    }

    #[test]
    fn split_spec_serializes_with_kebab_case_mode() {
        let spec = SplitSpec { mode: SplitMode::LeaveOneSpeakerOut, ..SplitSpec::default() };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"leave-one-speaker-out\""));
        let back: SplitSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        let sparse: SplitSpec = serde_json::from_str("{}").unwrap();
        assert_eq!(sparse, SplitSpec::default());
    }

    #[test]
    fn confusion_counts_match_hand_example() {
        let truth = ["a", "a", "b", "b"];
        let predicted = ["a", "b", "b", "b"];
        let cm = confusion_matrix(&truth, &predicted, &["a", "b"]).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(cm.total(), 4);
        assert_eq!(cm.row_total(0), 2);

        let perfect = confusion_matrix(&truth, &truth, &["a", "b"]).unwrap();
        assert_eq!(perfect.counts, vec![vec![2, 0], vec![0, 2]]);
        assert_eq!(perfect.overall_accuracy(), 1.0);

        assert!(matches!(
            confusion_matrix(&truth, &predicted[..2], &["a", "b"]),
            Err(EvalError::LengthMismatch { expected: 4, got: 2 })
        ));
        assert!(matches!(
            confusion_matrix(&truth, &["a", "a", "x", "b"], &["a", "b"]),
            Err(EvalError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn percentage_rendering_matches_table_style() {
        let cm = ConfusionMatrix {
            labels: vec!["angry".into(), "happy".into()],
            counts: vec![vec![15, 0], vec![8, 7]],
        };
        let text = cm.render_percentages();
        assert!(text.contains("100%"), "angry row should render 100%:\n{text}");
        assert!(text.contains("46.7%"), "happy row should render 7/15:\n{text}");
        assert!(text.contains("53.3%"));

        let csv = cm.to_csv();
        assert_eq!(
            csv,
            "label,angry,happy\nangry,15,0\nhappy,8,7\n"
        );
    }

    #[test]
    fn pct_formatting_drops_trailing_zero_only() {
        assert_eq!(fmt_pct(1.0), "100%");
        assert_eq!(fmt_pct(0.7333), "73.3%");
        assert_eq!(fmt_pct(0.0), "0%");
        assert_eq!(fmt_pct(7.0 / 15.0), "46.7%");
        assert_eq!(fmt_pct(0.96111), "96.1%");
        assert_eq!(fmt_pct(0.005), "0.5%");
    }

    #[test]
    fn macro_accuracy_is_the_unweighted_recall_mean() {
        let diagonal = ConfusionMatrix {
            labels: vec!["a".into(), "b".into()],
            counts: vec![vec![4, 0], vec![0, 9]],
        };
        assert_eq!(diagonal.macro_accuracy(&[] as &[&str]).unwrap(), 1.0);

        let cm = ConfusionMatrix {
            labels: vec!["a".into(), "b".into(), "c".into()],
            counts: vec![vec![3, 1, 0], vec![0, 5, 5], vec![2, 0, 2]],
        };
        let expected = (0.75 + 0.5 + 0.5) / 3.0;
        assert!((cm.macro_accuracy(&[] as &[&str]).unwrap() - expected).abs() < 1e-12);

        // Excluding all but one class leaves that class's recall.
        assert_eq!(cm.macro_accuracy(&["b", "c"]).unwrap(), 0.75);

        // Scaling every row by the same factor changes nothing.
        let scaled = ConfusionMatrix {
            labels: cm.labels.clone(),
            counts: cm
                .counts
                .iter()
                .map(|row| row.iter().map(|&c| c * 3).collect())
                .collect(),
        };
        assert_eq!(
            cm.macro_accuracy(&[] as &[&str]).unwrap(),
            scaled.macro_accuracy(&[] as &[&str]).unwrap()
        );

        let with_empty = ConfusionMatrix {
            labels: vec!["a".into(), "b".into()],
            counts: vec![vec![4, 0], vec![0, 0]],
        };
        assert!(matches!(
            with_empty.macro_accuracy(&[] as &[&str]),
            Err(EvalError::EmptyClass { .. })
        ));
        // ... unless the empty class is excluded.
        assert_eq!(with_empty.macro_accuracy(&["b"]).unwrap(), 1.0);

        assert!(matches!(
            cm.macro_accuracy(&["zzz"]),
            Err(EvalError::UnknownLabel { .. })
        ));
        assert!(matches!(
            cm.macro_accuracy(&["a", "b", "c"]),
            Err(EvalError::EmptyClass { .. })
        ));
    }

    // --- cascade-level reports on easy synthetic clusters ---

    fn cluster_center(label: EmotionLabel) -> (f64, f64) {
        match label {
            EmotionLabel::Angry => (8.0, 0.0),
            EmotionLabel::Disgust => (8.0, 4.0),
            EmotionLabel::Fear => (12.0, 0.0),
            EmotionLabel::Happy => (0.0, 8.0),
            EmotionLabel::Neutral => (-10.0, -10.0),
            EmotionLabel::Sad => (12.0, 4.0),
            EmotionLabel::Surprise => (4.0, 8.0),
        }
    }

    fn clustered_noisy(
        seed: u64,
        per_class: usize,
        sigma: f64,
    ) -> (Vec<Vec<f64>>, Vec<EmotionLabel>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &label in &EmotionLabel::ALL {
            let (cx, cy) = cluster_center(label);
            for _ in 0..per_class {
                x.push(vec![cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
                y.push(label);
            }
        }
        (x, y)
    }

    fn clustered(seed: u64, per_class: usize) -> (Vec<Vec<f64>>, Vec<EmotionLabel>) {
        clustered_noisy(seed, per_class, 0.45)
    }

    fn small_forest_config() -> crate::learners::LearnerConfig {
        LearnerConfig::Forest(ForestParams { n_trees: 15, ..ForestParams::default() })
    }

    #[test]
    fn stage_reports_route_by_ground_truth_not_by_upstream_predictions() {
        let (x, y) = clustered(30, 10);
        // m1 is a single majority leaf that calls everything "emotional",
        // so stage 1 is deliberately broken.
        let config = CascadeConfig {
            m1: LearnerConfig::Tree(TreeParams { max_depth: 10, min_samples_leaf: 10_000 }),
            m2: small_forest_config(),
            m3p: small_forest_config(),
            m3n: small_forest_config(),
        };
        let model = train_cascade(&x, &y, &config, "fp").unwrap();
        let reports = stage_reports(&model, &x, &y).unwrap();

        assert_eq!(
            reports.iter().map(|r| r.stage).collect::<Vec<_>>(),
            StageId::ALL.to_vec()
        );
        let by_stage: std::collections::HashMap<StageId, &StageReport> =
            reports.iter().map(|r| (r.stage, r)).collect();

        // Stage 1 sees everything and gets neutral fully wrong.
        let s1 = by_stage[&StageId::One];
        assert_eq!(s1.n_samples, 70);
        assert_eq!(s1.matrix.per_class_recall()[0], Some(0.0)); // neutral
        assert_eq!(s1.matrix.per_class_recall()[1], Some(1.0)); // emotional

        // Downstream stage sample counts come from ground truth, untouched
        // by m1's mistakes.
        assert_eq!(by_stage[&StageId::Two].n_samples, 60);
        assert_eq!(by_stage[&StageId::ThreePositive].n_samples, 20);
        assert_eq!(by_stage[&StageId::ThreeNegative].n_samples, 40);

        let text = s1.render_text();
        assert!(text.starts_with("Stage 1 (n=70, overall "));
    }

    #[test]
    fn stage_reports_require_every_stage_to_be_populated() {
        let (x, y) = clustered(31, 8);
        let model = train_cascade(
            &x,
            &y,
            &CascadeConfig::homogeneous(small_forest_config()),
            "fp",
        )
        .unwrap();
        // A test set with no positive samples starves stage 3P.
        let kept: Vec<usize> = (0..y.len())
            .filter(|&i| !matches!(y[i], EmotionLabel::Happy | EmotionLabel::Surprise))
            .collect();
        let fx: Vec<Vec<f64>> = kept.iter().map(|&i| x[i].clone()).collect();
        let fy: Vec<EmotionLabel> = kept.iter().map(|&i| y[i]).collect();
        assert!(matches!(
            stage_reports(&model, &fx, &fy),
            Err(EvalError::EmptyStage { stage: StageId::ThreePositive })
        ));
    }

    #[test]
    fn end_to_end_recall_never_exceeds_stage_three_recall() {
        // Noisy enough that stages actually make mistakes, so the
        // inequality is exercised rather than trivially 1.0 <= 1.0.
        let (x, y) = clustered_noisy(32, 14, 1.1);
        let model = train_cascade(
            &x,
            &y,
            &CascadeConfig::homogeneous(small_forest_config()),
            "fp",
        )
        .unwrap();
        let (tx, ty) = clustered_noisy(33, 10, 1.1);

        let truth: Vec<&str> = ty.iter().map(|l| l.as_str()).collect();
        let predicted: Vec<String> = tx
            .iter()
            .map(|row| model.predict(row).unwrap().label.as_str().to_string())
            .collect();
        let vocabulary: Vec<&str> = EmotionLabel::ALL.iter().map(|l| l.as_str()).collect();
        let end_to_end = confusion_matrix(&truth, &predicted, &vocabulary).unwrap();

        let reports = stage_reports(&model, &tx, &ty).unwrap();
        let e2e_recalls = end_to_end.per_class_recall();

        // A sample predicted correctly end-to-end was necessarily predicted
        // correctly by its stage-3 model, so per-class e2e recall cannot
        // exceed the stage-3 recall.
        for &label in EmotionLabel::ALL.iter().filter(|&&l| l != EmotionLabel::Neutral) {
            let stage = if matches!(label, EmotionLabel::Happy | EmotionLabel::Surprise) {
                StageId::ThreePositive
            } else {
                StageId::ThreeNegative
            };
            let report = reports.iter().find(|r| r.stage == stage).unwrap();
            let pos = report
                .matrix
                .labels
                .iter()
                .position(|l| l == label.as_str())
                .unwrap();
            let stage_recall = report.matrix.per_class_recall()[pos].unwrap();
            let e2e = e2e_recalls[label.index()].unwrap();
            assert!(
                e2e <= stage_recall + 1e-12,
                "{label:?}: end-to-end {e2e} > stage {stage_recall}"
            );
        }

        // Neutral has a single-stage path, so the two views agree exactly.
        let s1 = reports.iter().find(|r| r.stage == StageId::One).unwrap();
        let neutral_stage_recall = s1.matrix.per_class_recall()[0].unwrap();
        assert_eq!(e2e_recalls[EmotionLabel::Neutral.index()], Some(neutral_stage_recall));
    }

    #[test]
    fn comparison_reports_share_the_test_set_and_round_trip() {
        let (x, y) = clustered(34, 12);
        let cascade_config = CascadeConfig::homogeneous(small_forest_config());
        let cascade = train_cascade(&x, &y, &cascade_config, "fp-shared").unwrap();
        let flat_config = small_forest_config();
        let flat = train_flat(&x, &y, &flat_config).unwrap();
        let (tx, ty) = clustered(35, 6);

        let report = compare(
            &cascade,
            &flat,
            "fp-shared",
            &tx,
            &ty,
            &SplitSpec::default(),
            &flat_config,
            &[EmotionLabel::Surprise],
        )
        .unwrap();

        assert_eq!(report.excluded, vec!["surprise"]);
        assert_eq!(report.cascade.matrix.total(), ty.len() as u64);
        assert_eq!(report.flat.matrix.total(), ty.len() as u64);
        assert_eq!(report.feature_fingerprint, "fp-shared");

        // Both arms are near-perfect on these clusters, so the matrices are
        // identically diagonal and the macro gap is zero.
        assert!(report.cascade.macro_accuracy >= 0.95);
        assert!(report.flat.macro_accuracy >= 0.95);

        let json = serde_json::to_string(&report).unwrap();
        let back: ComparisonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);

        let text = report.render_text();
        assert!(text.contains("Cascade: macro accuracy"));
        assert!(text.contains("Flat baseline: macro accuracy"));
        assert!(text.contains("Macro gap"));

        let err = compare(
            &cascade,
            &flat,
            "other-fp",
            &tx,
            &ty,
            &SplitSpec::default(),
            &flat_config,
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::ConfigMismatch { .. }));
    }

    #[test]
    fn identical_predictions_produce_identical_matrices() {
        let (x, y) = clustered(36, 10);
        let config = CascadeConfig::homogeneous(small_forest_config());
        let cascade = train_cascade(&x, &y, &config, "fp").unwrap();
        let flat = train_flat(&x, &y, &small_forest_config()).unwrap();

        // On well-separated clusters both models are perfect on their own
        // training clusters' centers, hence identical diagonal matrices.
        let probes: Vec<Vec<f64>> = EmotionLabel::ALL
            .iter()
            .map(|&l| {
                let (cx, cy) = cluster_center(l);
                vec![cx, cy]
            })
            .collect();
        let labels: Vec<EmotionLabel> = EmotionLabel::ALL.to_vec();
        let report = compare(
            &cascade,
            &flat,
            "fp",
            &probes,
            &labels,
            &SplitSpec::default(),
            &small_forest_config(),
            &[],
        )
        .unwrap();
        assert_eq!(report.cascade.matrix, report.flat.matrix);
        assert_eq!(report.macro_gap(), 0.0);
        for i in 0..7 {
            assert_eq!(report.cascade.matrix.counts[i][i], 1);
        }
    }

    #[test]
    fn split_plus_models_reproduce_under_the_same_seed() {
        let (x, y) = clustered(37, 12);
        let speakers = round_robin_speakers(y.len(), 4);
        let spec = SplitSpec { seed: 5, ..SplitSpec::default() };
        let split = stratified_split(&y, &speakers, &spec).unwrap();

        let gather = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<EmotionLabel>) {
            (
                idx.iter().map(|&i| x[i].clone()).collect(),
                idx.iter().map(|&i| y[i]).collect(),
            )
        };
        let (train_x, train_y) = gather(&split.train);
        let (test_x, test_y) = gather(&split.test);

        let config = CascadeConfig::homogeneous(small_forest_config());
        let a = train_cascade(&train_x, &train_y, &config, "fp").unwrap();
        let b = train_cascade(&train_x, &train_y, &config, "fp").unwrap();
        assert_eq!(a, b);
        for (row, _) in test_x.iter().zip(&test_y) {
            assert_eq!(a.predict(row).unwrap(), b.predict(row).unwrap());
        }

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let probe = vec![rng.gen_range(-12.0..14.0), rng.gen_range(-12.0..10.0)];
        assert_eq!(a.predict(&probe).unwrap(), b.predict(&probe).unwrap());
    }
}
