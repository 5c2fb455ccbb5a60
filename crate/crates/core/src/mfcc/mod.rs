//! MFCC feature extraction.
//!
//! The pipeline per frame: pre-emphasis (applied once to the whole signal),
//! 25 ms frames at a 10 ms hop, Hamming window, power spectrum on a
//! power-of-two FFT, triangular mel filterbank, floored log, orthonormal
//! DCT-II. Per utterance, frame coefficients are pooled into means and
//! population standard deviations.

mod dct;
mod fft;
mod filterbank;

pub use dct::dct_ii;
pub use filterbank::{hz_to_mel, mel_to_hz, MelFilterbank};

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{AudioClip, EmotionLabel, LabeledUtterance};
use crate::num::Real;

use dct::DctPlan;
use fft::{next_power_of_two, FftPlan};

/// Upper band edge: an explicit frequency or the clip's Nyquist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FmaxHz {
    /// Half the sample rate of whatever clip is being processed.
    Nyquist,
    /// Fixed band edge in Hz.
    #[serde(untagged)]
    Hz(f64),
}

impl FmaxHz {
    /// Resolves against a sample rate.
    pub fn resolve(self, sample_rate_hz: u32) -> f64 {
        match self {
            FmaxHz::Nyquist => f64::from(sample_rate_hz) / 2.0,
            FmaxHz::Hz(v) => v,
        }
    }
}

/// MFCC extraction parameters.
///
/// Serialized with every field explicit; the serialized form (plus the
/// feature dimension) is hashed into the feature fingerprint that model
/// files carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    /// Pre-emphasis coefficient in `[0, 1)`.
    pub pre_emphasis: f64,
    /// Frame length in milliseconds; must exceed the hop.
    pub frame_len_ms: f64,
    /// Hop between frame starts in milliseconds.
    pub hop_ms: f64,
    /// Number of mel filters.
    pub n_mels: usize,
    /// Number of cepstral coefficients kept per frame.
    pub n_coeffs: usize,
    /// Lower band edge in Hz.
    pub fmin_hz: f64,
    /// Upper band edge.
    pub fmax_hz: FmaxHz,
    /// Filter energies are clamped to at least this before the log.
    pub log_floor: f64,
    /// Keep coefficient 0 (overall log energy). When false, coefficients
    /// `1..=n_coeffs` are kept instead.
    pub include_c0: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            pre_emphasis: 0.97,
            frame_len_ms: 25.0,
            hop_ms: 10.0,
            n_mels: 26,
            n_coeffs: 16,
            fmin_hz: 0.0,
            fmax_hz: FmaxHz::Nyquist,
            log_floor: 1e-10,
            include_c0: true,
        }
    }
}

impl MfccConfig {
    /// Checks the config against a sample rate.
    pub fn validate(&self, sample_rate_hz: u32) -> Result<(), MfccError> {
        let invalid = |field: &'static str, detail: String| {
            Err(MfccError::InvalidConfig { field, detail })
        };
        if !(0.0..1.0).contains(&self.pre_emphasis) {
            return invalid("pre_emphasis", format!("{} outside [0, 1)", self.pre_emphasis));
        }
        if !self.hop_ms.is_finite()
            || !self.frame_len_ms.is_finite()
            || self.hop_ms <= 0.0
            || self.frame_len_ms <= self.hop_ms
        {
            return invalid(
                "frame_len_ms/hop_ms",
                format!("need frame_len_ms > hop_ms > 0, got {}/{}", self.frame_len_ms, self.hop_ms),
            );
        }
        if self.frame_samples(sample_rate_hz) == 0 || self.hop_samples(sample_rate_hz) == 0 {
            return invalid("hop_ms", "frame or hop rounds to zero samples".into());
        }
        if self.n_coeffs == 0 {
            return invalid("n_coeffs", "must be at least 1".into());
        }
        let needed_mels = if self.include_c0 { self.n_coeffs } else { self.n_coeffs + 1 };
        if self.n_mels < needed_mels {
            return invalid(
                "n_coeffs",
                format!("{} coefficients need at least {needed_mels} mel filters, have {}", self.n_coeffs, self.n_mels),
            );
        }
        if self.log_floor <= 0.0 || !self.log_floor.is_finite() {
            return invalid("log_floor", "must be positive and finite".into());
        }
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        let fmax = self.fmax_hz.resolve(sample_rate_hz);
        if self.fmin_hz < 0.0 || fmax <= self.fmin_hz || fmax > nyquist {
            return invalid(
                "fmin_hz/fmax_hz",
                format!("need 0 <= fmin < fmax <= Nyquist, got {}/{fmax}", self.fmin_hz),
            );
        }
        Ok(())
    }

    /// Frame length in samples at a given rate.
    pub fn frame_samples(&self, sample_rate_hz: u32) -> usize {
        (self.frame_len_ms * f64::from(sample_rate_hz) / 1000.0).round() as usize
    }

    /// Hop length in samples at a given rate.
    pub fn hop_samples(&self, sample_rate_hz: u32) -> usize {
        (self.hop_ms * f64::from(sample_rate_hz) / 1000.0).round() as usize
    }

    /// Dimension of the pooled utterance feature vector (means + stds).
    pub fn feature_dim(&self) -> usize {
        2 * self.n_coeffs
    }
}

/// Hash of an MFCC config plus its feature dimension.
///
/// Models store this; predicting with features extracted under a different
/// config is refused by comparing fingerprints.
pub fn feature_fingerprint(config: &MfccConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    hasher.update(b"|dim=");
    hasher.update(config.feature_dim().to_string().as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Per-frame MFCC coefficients for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccMatrix<T> {
    /// One row per frame, each `n_coeffs` wide.
    pub coeffs: Vec<Vec<T>>,
    /// Start time of each frame in seconds (`i * hop`).
    pub frame_times_s: Vec<f64>,
}

impl<T> MfccMatrix<T> {
    pub fn n_frames(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n_coeffs(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }
}

/// Pooled per-utterance feature vector: per-coefficient means, then
/// per-coefficient population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceFeatures<T> {
    pub values: Vec<T>,
}

impl<T> UtteranceFeatures<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Errors from feature extraction and feature-file handling.
#[derive(Debug)]
pub enum MfccError {
    /// A config field is out of range (possibly relative to a sample rate).
    InvalidConfig { field: &'static str, detail: String },
    /// The clip is shorter than one frame.
    ClipTooShort { needed: usize, got: usize },
    /// Two adjacent filterbank edge points fell on the same FFT bin.
    DegenerateFilter { edge_point: usize },
    /// Extraction produced a NaN or infinity.
    NonFiniteFeature { frame: usize, coeff: usize },
    /// Feature CSV I/O failure.
    Io { path: PathBuf, source: std::io::Error },
    /// Feature CSV contents are invalid.
    MalformedFeatureFile { path: PathBuf, line: u64, detail: String },
}

impl fmt::Display for MfccError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfccError::InvalidConfig { field, detail } => {
                write!(f, "invalid MFCC config ({field}): {detail}")
            }
            MfccError::ClipTooShort { needed, got } => {
                write!(f, "clip too short: {got} samples, need at least {needed} for one frame")
            }
            MfccError::DegenerateFilter { edge_point } => write!(
                f,
                "mel filterbank degenerate at edge point {edge_point}: too many filters for this FFT size"
            ),
            MfccError::NonFiniteFeature { frame, coeff } => {
                write!(f, "non-finite feature at frame {frame}, coefficient {coeff}")
            }
            MfccError::Io { path, source } => {
                write!(f, "I/O error on {}: {source}", path.display())
            }
            MfccError::MalformedFeatureFile { path, line, detail } => {
                write!(f, "feature file {} line {line}: {detail}", path.display())
            }
        }
    }
}

impl std::error::Error for MfccError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            MfccError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Mel filter energies per frame (linear, before the floored log).
///
/// Shares the exact framing, windowing, and FFT with [`extract_mfcc`];
/// useful for inspecting where a clip's energy lands.
pub fn mel_energies<T: Real>(
    clip: &AudioClip<T>,
    config: &MfccConfig,
) -> Result<Vec<Vec<T>>, MfccError> {
    Ok(frame_energies(clip, config)?.0)
}

fn frame_energies<T: Real>(
    clip: &AudioClip<T>,
    config: &MfccConfig,
) -> Result<(Vec<Vec<T>>, f64), MfccError> {
    let sr = clip.sample_rate_hz;
    config.validate(sr)?;
    let frame_len = config.frame_samples(sr);
    let hop = config.hop_samples(sr);
    if clip.samples.len() < frame_len {
        return Err(MfccError::ClipTooShort {
            needed: frame_len,
            got: clip.samples.len(),
        });
    }

    // Pre-emphasis over the whole signal, once: y[t] = x[t] - a*x[t-1].
    let a = T::of(config.pre_emphasis);
    let x = &clip.samples;
    let mut emphasized = Vec::with_capacity(x.len());
    emphasized.push(x[0]);
    for t in 1..x.len() {
        emphasized.push(x[t] - a * x[t - 1]);
    }

    let n_frames = (emphasized.len() - frame_len) / hop + 1;
    let n_fft = next_power_of_two(frame_len);
    let window: Vec<T> = hamming(frame_len);
    let filterbank: MelFilterbank<T> = MelFilterbank::new(
        sr,
        n_fft,
        config.n_mels,
        config.fmin_hz,
        config.fmax_hz.resolve(sr),
    )?;
    let fft = FftPlan::new(n_fft);
    let inv_n_fft = T::of(1.0 / n_fft as f64);

    let mut energies = Vec::with_capacity(n_frames);
    let mut re = vec![T::zero(); n_fft];
    let mut im = vec![T::zero(); n_fft];
    let mut power = vec![T::zero(); n_fft / 2 + 1];
    for i in 0..n_frames {
        let start = i * hop;
        for (j, slot) in re.iter_mut().enumerate() {
            *slot = if j < frame_len {
                emphasized[start + j] * window[j]
            } else {
                T::zero()
            };
        }
        im.iter_mut().for_each(|v| *v = T::zero());
        fft.forward(&mut re, &mut im);
        for (k, p) in power.iter_mut().enumerate() {
            *p = (re[k] * re[k] + im[k] * im[k]) * inv_n_fft;
        }
        energies.push(filterbank.apply(&power)?);
    }
    let hop_s = hop as f64 / f64::from(sr);
    Ok((energies, hop_s))
}

/// Extracts the MFCC matrix for a clip.
pub fn extract_mfcc<T: Real>(
    clip: &AudioClip<T>,
    config: &MfccConfig,
) -> Result<MfccMatrix<T>, MfccError> {
    let (energies, hop_s) = frame_energies(clip, config)?;
    let floor = T::of(config.log_floor);
    let dct = DctPlan::new(config.n_mels);
    // When c0 is excluded we still compute it and drop it, keeping the DCT
    // output window contiguous.
    let kept = if config.include_c0 {
        config.n_coeffs
    } else {
        config.n_coeffs + 1
    };

    let mut coeffs = Vec::with_capacity(energies.len());
    let mut logs = vec![T::zero(); config.n_mels];
    let mut row = vec![T::zero(); kept];
    for (frame, energy) in energies.iter().enumerate() {
        for (slot, &e) in logs.iter_mut().zip(energy) {
            *slot = e.max(floor).ln();
        }
        dct.apply(&logs, &mut row);
        let out: Vec<T> = if config.include_c0 {
            row.clone()
        } else {
            row[1..].to_vec()
        };
        if let Some(coeff) = out.iter().position(|v| !v.is_finite()) {
            return Err(MfccError::NonFiniteFeature { frame, coeff });
        }
        coeffs.push(out);
    }

    let frame_times_s = (0..coeffs.len()).map(|i| i as f64 * hop_s).collect();
    Ok(MfccMatrix { coeffs, frame_times_s })
}

/// Pools a frame matrix into per-coefficient means and population standard
/// deviations (std is zero for single-frame clips).
pub fn aggregate<T: Real>(matrix: &MfccMatrix<T>) -> Result<UtteranceFeatures<T>, MfccError> {
    let n_frames = matrix.n_frames();
    if n_frames == 0 {
        return Err(MfccError::ClipTooShort { needed: 1, got: 0 });
    }
    let n_coeffs = matrix.n_coeffs();
    let inv_n = T::of(1.0 / n_frames as f64);

    let mut means = vec![T::zero(); n_coeffs];
    for row in &matrix.coeffs {
        for (m, v) in means.iter_mut().zip(row) {
            *m += *v;
        }
    }
    for m in means.iter_mut() {
        *m *= inv_n;
    }

    let mut vars = vec![T::zero(); n_coeffs];
    for row in &matrix.coeffs {
        for ((var, v), m) in vars.iter_mut().zip(row).zip(&means) {
            let d = *v - *m;
            *var += d * d;
        }
    }

    let mut values = means;
    values.extend(vars.into_iter().map(|v| (v * inv_n).sqrt()));
    Ok(UtteranceFeatures { values })
}

fn hamming<T: Real>(len: usize) -> Vec<T> {
    if len == 1 {
        return vec![T::one()];
    }
    (0..len)
        .map(|n| {
            T::of(0.54 - 0.46 * (std::f64::consts::TAU * n as f64 / (len - 1) as f64).cos())
        })
        .collect()
}

/// Labeled utterance features, parallel to their manifest entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    pub entries: Vec<LabeledUtterance>,
    pub features: Vec<Vec<T>>,
}

impl<T: Real> FeatureSet<T> {
    /// Builds a set, checking that entries and rows are parallel and
    /// uniformly sized.
    pub fn new(entries: Vec<LabeledUtterance>, features: Vec<Vec<T>>) -> Result<Self, MfccError> {
        if entries.len() != features.len() {
            return Err(MfccError::InvalidConfig {
                field: "features",
                detail: format!("{} entries but {} feature rows", entries.len(), features.len()),
            });
        }
        if let Some(first) = features.first() {
            let dim = first.len();
            if features.iter().any(|row| row.len() != dim) {
                return Err(MfccError::InvalidConfig {
                    field: "features",
                    detail: "feature rows have inconsistent dimensions".into(),
                });
            }
        }
        Ok(FeatureSet { entries, features })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dimension of the feature rows (0 for an empty set).
    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn labels(&self) -> Vec<EmotionLabel> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn speakers(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.speaker_id.clone()).collect()
    }
}

/// Writes a feature set as CSV: `path,label,speaker,f0..f{d-1}`, floats with
/// at least nine significant digits.
///
/// `dim` controls the header when the set is empty.
pub fn write_features_csv<T: Real>(
    path: impl AsRef<Path>,
    set: &FeatureSet<T>,
    dim: usize,
) -> Result<(), MfccError> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| MfccError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dim = if set.is_empty() { dim } else { set.dim() };
    let mut header = vec!["path".to_string(), "label".into(), "speaker".into()];
    header.extend((0..dim).map(|i| format!("f{i}")));

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(io),
            other => MfccError::MalformedFeatureFile {
                path: path.to_path_buf(),
                line: 0,
                detail: format!("{other:?}"),
            },
        })?;
    let write_record = |w: &mut csv::Writer<std::fs::File>, rec: &[String]| {
        w.write_record(rec).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => MfccError::Io {
                path: path.to_path_buf(),
                source: io,
            },
            other => MfccError::MalformedFeatureFile {
                path: path.to_path_buf(),
                line: 0,
                detail: format!("{other:?}"),
            },
        })
    };
    write_record(&mut writer, &header)?;
    for (entry, row) in set.entries.iter().zip(&set.features) {
        let mut record = vec![
            entry.clip_path.to_string_lossy().into_owned(),
            entry.label.as_str().to_string(),
            entry.speaker_id.clone(),
        ];
        record.extend(row.iter().map(|v| format!("{v:.9e}")));
        write_record(&mut writer, &record)?;
    }
    writer.flush().map_err(io_err)
}

/// Reads a feature CSV written by [`write_features_csv`].
pub fn read_features_csv<T: Real>(path: impl AsRef<Path>) -> Result<FeatureSet<T>, MfccError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => MfccError::Io {
                path: path.to_path_buf(),
                source: io,
            },
            other => MfccError::MalformedFeatureFile {
                path: path.to_path_buf(),
                line: 0,
                detail: format!("{other:?}"),
            },
        })?;

    let malformed = |line: u64, detail: String| MfccError::MalformedFeatureFile {
        path: path.to_path_buf(),
        line,
        detail,
    };

    let headers = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    let fields: Vec<&str> = headers.iter().map(str::trim).collect();
    if fields.len() < 4 || fields[..3] != ["path", "label", "speaker"] {
        return Err(malformed(1, "header must start with path,label,speaker,f0".into()));
    }
    for (i, name) in fields[3..].iter().enumerate() {
        if *name != format!("f{i}") {
            return Err(malformed(1, format!("feature column {} named {name}, expected f{i}", i + 3)));
        }
    }
    let dim = fields.len() - 3;

    let mut entries = Vec::new();
    let mut features = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != dim + 3 {
            return Err(malformed(line, format!("expected {} fields, found {}", dim + 3, record.len())));
        }
        let label: EmotionLabel = record[1]
            .parse()
            .map_err(|()| malformed(line, format!("unknown label \"{}\"", &record[1])))?;
        let mut row = Vec::with_capacity(dim);
        for value in record.iter().skip(3) {
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|e| malformed(line, format!("bad float \"{value}\": {e}")))?;
            if !parsed.is_finite() {
                return Err(malformed(line, format!("non-finite feature {value}")));
            }
            row.push(T::of(parsed));
        }
        entries.push(LabeledUtterance {
            clip_path: PathBuf::from(record[0].to_string()),
            label,
            speaker_id: record[2].to_string(),
        });
        features.push(row);
    }
    FeatureSet::new(entries, features)
}
