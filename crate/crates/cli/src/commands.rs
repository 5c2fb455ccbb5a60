//! Implementations of the six subcommands.
//!
//! Every command follows the same arc: merge the run configuration, load or
//! extract features, do the work through the toolkit crate, and write the
//! results under the configured output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serkit::cascade::{predict_flat, train_cascade, train_flat, StageStep};
use serkit::corpus::{generate_synthetic_corpus, load_manifest, read_wav, EmotionLabel};
use serkit::eval::{
    confusion_matrix, fmt_pct, stage_reports, stratified_split, ComparisonReport,
    ConfusionMatrix, SplitMode, SplitSpec, StageReport,
};
use serkit::mfcc::{
    aggregate, extract_mfcc, feature_fingerprint, read_features_csv, write_features_csv,
    FeatureSet, MfccConfig,
};

use crate::args::{
    CompareArgs, DataInput, EvaluateArgs, FeaturesArgs, Mode, PredictArgs, SynthArgs, TrainArgs,
};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::model_file::{learner_seed, tool_version, ModelFile, ModelPayload, MODEL_FORMAT_VERSION};

/// `synth`: write a synthetic corpus and print where its manifest landed.
pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let mut config = args.common.resolve()?;
    if let Some(n) = args.per_class {
        config.synth.utterances_per_class = n;
        config
            .synth
            .validate()
            .map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    }
    let out_dir = args.out.unwrap_or_else(|| config.out_dir.join("corpus"));
    let manifest = generate_synthetic_corpus(&config.synth, &out_dir)?;
    let n = config.synth.utterances_per_class * config.synth.classes.len();
    println!("wrote {} clips; manifest at {}", n, manifest.display());
    Ok(())
}

/// `features`: manifest in, one pooled feature row per utterance out.
pub fn features(args: FeaturesArgs) -> Result<(), CliError> {
    let config = args.common.resolve()?;
    let out = args.out.unwrap_or_else(|| config.out_dir.join("features.csv"));
    let set = extract_features(&args.manifest, &config.mfcc, args.skip_errors)?;
    ensure_parent(&out)?;
    write_features_csv(&out, &set, config.mfcc.feature_dim())?;
    println!("wrote {} feature rows to {}", set.len(), out.display());
    Ok(())
}

/// `train`: fit a cascade or flat model and save it atomically.
pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let config = args.common.resolve()?;
    let out = args
        .out
        .unwrap_or_else(|| config.out_dir.join(format!("{}-model.json", args.mode)));
    let set = load_input(&args.input, &config, args.skip_errors)?;
    if set.is_empty() {
        return Err(CliError::data("training needs at least one feature row"));
    }
    check_dim(&set, &config)?;
    let fingerprint = feature_fingerprint(&config.mfcc);
    let y = set.labels();

    let (payload, seed) = match args.mode {
        Mode::Cascade => {
            let cascade_config = config.cascade_config();
            let seed = learner_seed(&cascade_config.m1);
            let model = train_cascade(&set.features, &y, &cascade_config, fingerprint.clone())?;
            (ModelPayload::Cascade { model: Box::new(model) }, seed)
        }
        Mode::Flat => {
            let model = train_flat(&set.features, &y, &config.learner)?;
            let payload = ModelPayload::Flat { config: config.learner.clone(), model };
            (payload, learner_seed(&config.learner))
        }
    };

    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        created_with: tool_version(),
        seed,
        mfcc_config: config.mfcc.clone(),
        feature_fingerprint: fingerprint,
        payload,
    };
    file.save(&out)?;
    println!("trained {} model on {} utterances -> {}", args.mode, set.len(), out.display());
    Ok(())
}

/// One classified input, as a line of JSON.
///
/// Cascade records expose the stage-by-stage route; the top-level confidence
/// is the product of the path's stage confidences. Flat records expose the
/// full per-label score vector.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum PredictionRecord {
    Cascade { source: String, label: String, confidence: f64, path: Vec<StageStep<f64>> },
    Flat { source: String, label: String, scores: BTreeMap<String, f64> },
}

/// `predict`: classify a WAV or every row of a feature CSV.
pub fn predict(args: PredictArgs) -> Result<(), CliError> {
    let config = args.common.resolve()?;
    let model = ModelFile::load(&args.model)?;
    model.verify_fingerprint(&feature_fingerprint(&config.mfcc))?;

    let (sources, rows) = match (&args.input.wav, &args.input.features) {
        (Some(wav), None) => {
            let row = extract_one(wav, &config.mfcc)?;
            (vec![wav.display().to_string()], vec![row])
        }
        (None, Some(csv)) => {
            let set = read_features_csv::<f64>(csv)?;
            let sources =
                set.entries.iter().map(|e| e.clip_path.display().to_string()).collect();
            (sources, set.features)
        }
        // clap's argument group guarantees exactly one source.
        _ => return Err(CliError::internal("predict input resolved to neither wav nor features")),
    };

    let mut lines = String::new();
    for (source, row) in sources.iter().zip(&rows) {
        let record = predict_record(&model.payload, source, row)?;
        let json = serde_json::to_string(&record)
            .map_err(|e| CliError::internal(format!("cannot serialize prediction: {e}")))?;
        lines.push_str(&json);
        lines.push('\n');
    }

    match &args.out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, &lines)
                .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{lines}"),
    }
    Ok(())
}

fn predict_record(
    payload: &ModelPayload,
    source: &str,
    row: &[f64],
) -> Result<PredictionRecord, CliError> {
    Ok(match payload {
        ModelPayload::Cascade { model } => {
            let p = model.predict(row)?;
            PredictionRecord::Cascade {
                source: source.to_string(),
                label: p.label.as_str().to_string(),
                confidence: p.confidence,
                path: p.path,
            }
        }
        ModelPayload::Flat { model, .. } => {
            let (label, scores) = predict_flat(model, row)?;
            let scores = (0..model.n_classes())
                .map(|i| (model.label_name(i).to_string(), scores[i]))
                .collect();
            PredictionRecord::Flat {
                source: source.to_string(),
                label: label.as_str().to_string(),
                scores,
            }
        }
    })
}

/// Everything `evaluate` learned from one split, in one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Feeding this configuration back in reproduces the numbers exactly.
    pub run_config: RunConfig,
    pub feature_fingerprint: String,
    pub n_train: usize,
    pub n_test: usize,
    pub held_out_speaker: Option<String>,
    /// Per-stage matrices under ground-truth routing.
    pub stages: Vec<StageReport>,
    /// Full 7-class matrix with upstream errors propagating.
    pub end_to_end: ConfusionMatrix,
    pub per_class_recall: Vec<Option<f64>>,
    /// Unweighted mean recall over the non-excluded classes.
    pub macro_accuracy: f64,
}

impl EvaluationReport {
    /// The text-table rendering written next to the JSON document.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "Evaluation: {} train / {} test utterances\n",
            self.n_train, self.n_test
        );
        out.push_str(&format!("Features: {}\n", self.feature_fingerprint));
        out.push_str(&format!(
            "Split: {}\n",
            describe_split(&self.run_config.split, self.held_out_speaker.as_deref())
        ));
        if !self.run_config.exclude.is_empty() {
            out.push_str(&format!(
                "Excluded from macro: {}\n",
                self.run_config.exclude.join(", ")
            ));
        }
        for stage in &self.stages {
            out.push('\n');
            out.push_str(&stage.render_text());
        }
        out.push_str(&format!(
            "\nEnd-to-end (n={}, overall {})\n",
            self.n_test,
            fmt_pct(self.end_to_end.overall_accuracy())
        ));
        for line in self.end_to_end.render_percentages().lines() {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!("\nMacro accuracy: {}\n", fmt_pct(self.macro_accuracy)));
        out
    }
}

/// `evaluate`: split, train a cascade, and report stage plus end-to-end views.
pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let config = args.common.resolve()?;
    let out_dir = args.out.unwrap_or_else(|| config.out_dir.join("evaluation"));
    let set = load_input(&args.input, &config, args.skip_errors)?;
    check_dim(&set, &config)?;
    let report = evaluate_features(&config, &set)?;
    write_reports(&out_dir, "evaluation", &report, &report.render_text())?;
    write_matrix_csv(&out_dir.join("end-to-end-confusion.csv"), &report.end_to_end)?;
    println!(
        "macro accuracy {} on {} test utterances; reports under {}",
        fmt_pct(report.macro_accuracy),
        report.n_test,
        out_dir.display()
    );
    Ok(())
}

/// The measurement behind `evaluate`, separated from file I/O.
pub fn evaluate_features(
    config: &RunConfig,
    set: &FeatureSet<f64>,
) -> Result<EvaluationReport, CliError> {
    let labels = set.labels();
    let split = stratified_split(&labels, &set.speakers(), &config.split)?;
    let (x_train, y_train) = subset(set, &split.train);
    let (x_test, y_test) = subset(set, &split.test);

    let fingerprint = feature_fingerprint(&config.mfcc);
    let cascade = train_cascade(&x_train, &y_train, &config.cascade_config(), fingerprint.clone())?;

    let stages = stage_reports(&cascade, &x_test, &y_test)?;
    let truth: Vec<&str> = y_test.iter().map(|l| l.as_str()).collect();
    let mut predicted = Vec::with_capacity(x_test.len());
    for row in &x_test {
        predicted.push(cascade.predict(row)?.label.as_str().to_string());
    }
    let vocabulary: Vec<&str> = EmotionLabel::ALL.iter().map(|l| l.as_str()).collect();
    let end_to_end = confusion_matrix(&truth, &predicted, &vocabulary)?;
    let macro_accuracy = end_to_end.macro_accuracy(&config.exclude)?;

    Ok(EvaluationReport {
        run_config: config.clone(),
        feature_fingerprint: fingerprint,
        n_train: split.train.len(),
        n_test: split.test.len(),
        held_out_speaker: split.held_out_speaker,
        per_class_recall: end_to_end.per_class_recall(),
        stages,
        end_to_end,
        macro_accuracy,
    })
}

/// `compare` output: the two-arm report plus the configuration that made it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDocument {
    /// Feeding this configuration back in reproduces the numbers exactly.
    pub run_config: RunConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub held_out_speaker: Option<String>,
    pub report: ComparisonReport,
}

impl ComparisonDocument {
    /// The text-table rendering written next to the JSON document.
    pub fn render_text(&self) -> String {
        format!(
            "Comparison: {} train / {} test utterances\n{}",
            self.n_train,
            self.n_test,
            self.report.render_text()
        )
    }
}

/// `compare`: cascade and flat baseline on the identical split.
pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let config = args.common.resolve()?;
    let out_dir = args.out.unwrap_or_else(|| config.out_dir.join("comparison"));
    let set = load_input(&args.input, &config, args.skip_errors)?;
    check_dim(&set, &config)?;
    let document = compare_features(&config, &set)?;
    write_reports(&out_dir, "comparison", &document, &document.render_text())?;
    write_matrix_csv(&out_dir.join("cascade-confusion.csv"), &document.report.cascade.matrix)?;
    write_matrix_csv(&out_dir.join("flat-confusion.csv"), &document.report.flat.matrix)?;
    println!(
        "cascade {} vs flat {} (gap {:+.1} pp); reports under {}",
        fmt_pct(document.report.cascade.macro_accuracy),
        fmt_pct(document.report.flat.macro_accuracy),
        document.report.macro_gap() * 100.0,
        out_dir.display()
    );
    Ok(())
}

/// The measurement behind `compare`, separated from file I/O.
pub fn compare_features(
    config: &RunConfig,
    set: &FeatureSet<f64>,
) -> Result<ComparisonDocument, CliError> {
    let labels = set.labels();
    let split = stratified_split(&labels, &set.speakers(), &config.split)?;
    let (x_train, y_train) = subset(set, &split.train);
    let (x_test, y_test) = subset(set, &split.test);

    let fingerprint = feature_fingerprint(&config.mfcc);
    let cascade = train_cascade(&x_train, &y_train, &config.cascade_config(), fingerprint.clone())?;
    let flat = train_flat(&x_train, &y_train, &config.learner)?;
    let report = serkit::eval::compare(
        &cascade,
        &flat,
        &fingerprint,
        &x_test,
        &y_test,
        &config.split,
        &config.learner,
        &config.excluded_labels()?,
    )?;

    Ok(ComparisonDocument {
        run_config: config.clone(),
        n_train: split.train.len(),
        n_test: split.test.len(),
        held_out_speaker: split.held_out_speaker,
        report,
    })
}

// ---------------------------------------------------------------------------
// Shared plumbing

/// Extracts pooled features for every manifest entry.
///
/// A file that fails to decode aborts the run with its path unless
/// `skip_errors`, which drops the row and warns on stderr instead.
fn extract_features(
    manifest: &Path,
    config: &MfccConfig,
    skip_errors: bool,
) -> Result<FeatureSet<f64>, CliError> {
    let entries = load_manifest(manifest)?;
    let manifest_dir = manifest.parent().unwrap_or_else(|| Path::new(""));
    let mut kept = Vec::with_capacity(entries.len());
    let mut rows = Vec::with_capacity(entries.len());
    for entry in entries {
        match extract_one(&entry.resolve(manifest_dir), config) {
            Ok(row) => {
                kept.push(entry);
                rows.push(row);
            }
            Err(e) if skip_errors => eprintln!("warning: {e} (skipped)"),
            Err(e) => return Err(e),
        }
    }
    Ok(FeatureSet::new(kept, rows)?)
}

/// One WAV to one pooled feature row. Every error names the file.
fn extract_one(path: &Path, config: &MfccConfig) -> Result<Vec<f64>, CliError> {
    let clip = read_wav::<f64>(path)?;
    let named = |e: serkit::mfcc::MfccError| CliError::data(format!("{}: {e}", path.display()));
    let matrix = extract_mfcc(&clip, config).map_err(named)?;
    Ok(aggregate(&matrix).map_err(named)?.values)
}

/// Loads the rows a training-style command works on.
fn load_input(
    input: &DataInput,
    config: &RunConfig,
    skip_errors: bool,
) -> Result<FeatureSet<f64>, CliError> {
    match (&input.features, &input.manifest) {
        (Some(csv), None) => Ok(read_features_csv(csv)?),
        (None, Some(manifest)) => extract_features(manifest, &config.mfcc, skip_errors),
        // clap's argument group guarantees exactly one source.
        _ => Err(CliError::internal("data input resolved to neither features nor manifest")),
    }
}

/// A feature CSV must agree with the run configuration, because models
/// record that configuration as their features' provenance.
fn check_dim(set: &FeatureSet<f64>, config: &RunConfig) -> Result<(), CliError> {
    let expected = config.mfcc.feature_dim();
    if !set.is_empty() && set.dim() != expected {
        return Err(CliError::data(format!(
            "feature rows have {} dimensions but the run configuration produces {}; \
             pass the configuration the features were extracted with",
            set.dim(),
            expected
        )));
    }
    Ok(())
}

/// Gathers the rows and labels a split selected.
fn subset(set: &FeatureSet<f64>, indices: &[usize]) -> (Vec<Vec<f64>>, Vec<EmotionLabel>) {
    let x = indices.iter().map(|&i| set.features[i].clone()).collect();
    let y = indices.iter().map(|&i| set.entries[i].label).collect();
    (x, y)
}

/// One line summarizing how the test set was chosen.
fn describe_split(spec: &SplitSpec, held_out: Option<&str>) -> String {
    match spec.mode {
        SplitMode::Random => format!(
            "random {} test{}, seed {}",
            fmt_pct(spec.test_fraction),
            if spec.stratified { ", stratified" } else { "" },
            spec.seed
        ),
        SplitMode::LeaveOneSpeakerOut => match held_out {
            Some(speaker) => format!("leave-one-speaker-out, seed {} (held out {speaker})", spec.seed),
            None => format!("leave-one-speaker-out, seed {}", spec.seed),
        },
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) else {
        return Ok(());
    };
    fs::create_dir_all(parent)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", parent.display())))
}

/// Writes `<stem>.json` (pretty, trailing newline) and `<stem>.txt` into `dir`.
fn write_reports<R: Serialize>(
    dir: &Path,
    stem: &str,
    report: &R,
    text: &str,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::internal(format!("cannot serialize report: {e}")))?;
    json.push('\n');
    write_text(&dir.join(format!("{stem}.json")), &json)?;
    write_text(&dir.join(format!("{stem}.txt")), text)
}

fn write_matrix_csv(path: &Path, matrix: &ConfusionMatrix) -> Result<(), CliError> {
    write_text(path, &matrix.to_csv())
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}
