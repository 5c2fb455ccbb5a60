//! Audio corpus handling: WAV decoding, manifest files, and synthetic data.

mod manifest;
mod synth;
mod wav;

pub use manifest::{load_manifest, save_manifest};
pub use synth::{generate_synthetic_corpus, ClassSynthParams, SynthSpec};
pub use wav::{read_wav, write_wav};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Lowest sample rate the toolkit accepts, in Hz.
pub const MIN_SAMPLE_RATE_HZ: u32 = 8_000;
/// Highest sample rate the toolkit accepts, in Hz.
pub const MAX_SAMPLE_RATE_HZ: u32 = 48_000;

/// The seven emotion categories, in canonical (alphabetical) order.
///
/// The canonical order fixes label indices everywhere: confusion-matrix rows,
/// learner vocabularies, and tie-breaking all use it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Angry,
    Disgust,
    Fear,
    Happy,
    Neutral,
    Sad,
    Surprise,
}

impl EmotionLabel {
    /// All labels in canonical order.
    pub const ALL: [EmotionLabel; 7] = [
        EmotionLabel::Angry,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Happy,
        EmotionLabel::Neutral,
        EmotionLabel::Sad,
        EmotionLabel::Surprise,
    ];

    /// Index of this label in canonical order.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("label in ALL")
    }

    /// Label at a canonical index, if in range.
    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Lowercase name used in manifests, reports, and file names.
    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Angry => "angry",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Happy => "happy",
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Surprise => "surprise",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = ();

    /// Parses a label name case-insensitively.
    fn from_str(s: &str) -> Result<Self, ()> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .find(|l| l.as_str() == lower)
            .copied()
            .ok_or(())
    }
}

/// Mono audio samples normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    /// Normalized samples. Never empty; every value finite and in `[-1, 1]`.
    pub samples: Vec<T>,
    /// Sample rate from the source header, within
    /// [`MIN_SAMPLE_RATE_HZ`]`..=`[`MAX_SAMPLE_RATE_HZ`].
    pub sample_rate_hz: u32,
    /// Where the samples came from (file path, or a synthetic tag).
    pub source_path: PathBuf,
}

impl<T: Real> AudioClip<T> {
    /// Builds a clip, enforcing the type invariants.
    pub fn new(
        samples: Vec<T>,
        sample_rate_hz: u32,
        source_path: impl Into<PathBuf>,
    ) -> Result<Self, CorpusError> {
        let source_path = source_path.into();
        if samples.is_empty() {
            return Err(CorpusError::EmptyAudio(source_path));
        }
        if !(MIN_SAMPLE_RATE_HZ..=MAX_SAMPLE_RATE_HZ).contains(&sample_rate_hz) {
            return Err(CorpusError::InvalidSampleRate {
                path: source_path,
                hz: sample_rate_hz,
            });
        }
        let one = T::one();
        if let Some(index) = samples
            .iter()
            .position(|s| !s.is_finite() || *s < -one || *s > one)
        {
            return Err(CorpusError::InvalidSample {
                path: source_path,
                index,
            });
        }
        Ok(AudioClip {
            samples,
            sample_rate_hz,
            source_path,
        })
    }

    /// Clip duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }
}

/// One corpus entry: a clip path with its emotion label and speaker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledUtterance {
    /// Clip location as written in the manifest (relative paths are relative
    /// to the manifest's directory).
    pub clip_path: PathBuf,
    pub label: EmotionLabel,
    /// Non-empty speaker identifier; synthetic corpora use rotating
    /// placeholder ids.
    pub speaker_id: String,
}

impl LabeledUtterance {
    /// Resolves the clip path against the directory containing the manifest.
    pub fn resolve(&self, manifest_dir: &Path) -> PathBuf {
        if self.clip_path.is_absolute() {
            self.clip_path.clone()
        } else {
            manifest_dir.join(&self.clip_path)
        }
    }
}

/// Errors from corpus loading, decoding, and synthesis.
#[derive(Debug)]
pub enum CorpusError {
    /// The referenced file does not exist.
    MissingFile(PathBuf),
    /// The WAV container is structurally invalid.
    MalformedWav { path: PathBuf, detail: String },
    /// The WAV is valid but uses an encoding the toolkit does not read
    /// (only 16-bit PCM and 32-bit IEEE float, one or two channels).
    UnsupportedEncoding { path: PathBuf, detail: String },
    /// The data chunk holds zero samples.
    EmptyAudio(PathBuf),
    /// Header sample rate outside the accepted range.
    InvalidSampleRate { path: PathBuf, hz: u32 },
    /// A decoded sample was non-finite or out of `[-1, 1]`.
    InvalidSample { path: PathBuf, index: usize },
    /// The manifest lacks the required `path,label,speaker` header.
    MissingHeader { path: PathBuf, found: String },
    /// A manifest row names an emotion outside the seven known labels.
    UnknownLabel { path: PathBuf, line: u64, label: String },
    /// A manifest row is structurally bad (wrong arity, empty field).
    MalformedRow { path: PathBuf, line: u64, detail: String },
    /// Two manifest rows reference the same clip.
    DuplicatePath { path: PathBuf, line: u64, clip: PathBuf },
    /// A synthesis spec violates its invariants.
    InvalidSynthSpec(String),
    /// Underlying I/O failure.
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::MissingFile(p) => write!(f, "missing file: {}", p.display()),
            CorpusError::MalformedWav { path, detail } => {
                write!(f, "malformed WAV {}: {detail}", path.display())
            }
            CorpusError::UnsupportedEncoding { path, detail } => {
                write!(f, "unsupported WAV encoding in {}: {detail}", path.display())
            }
            CorpusError::EmptyAudio(p) => write!(f, "empty audio in {}", p.display()),
            CorpusError::InvalidSampleRate { path, hz } => write!(
                f,
                "sample rate {hz} Hz in {} outside supported range \
                 {MIN_SAMPLE_RATE_HZ}..={MAX_SAMPLE_RATE_HZ}",
                path.display()
            ),
            CorpusError::InvalidSample { path, index } => write!(
                f,
                "sample {index} in {} is non-finite or outside [-1, 1]",
                path.display()
            ),
            CorpusError::MissingHeader { path, found } => write!(
                f,
                "manifest {} must start with header \"path,label,speaker\", found \"{found}\"",
                path.display()
            ),
            CorpusError::UnknownLabel { path, line, label } => write!(
                f,
                "manifest {} line {line}: unknown label \"{label}\"",
                path.display()
            ),
            CorpusError::MalformedRow { path, line, detail } => {
                write!(f, "manifest {} line {line}: {detail}", path.display())
            }
            CorpusError::DuplicatePath { path, line, clip } => write!(
                f,
                "manifest {} line {line}: duplicate clip path {}",
                path.display(),
                clip.display()
            ),
            CorpusError::InvalidSynthSpec(detail) => {
                write!(f, "invalid synthesis spec: {detail}")
            }
            CorpusError::Io { path, source } => {
                write!(f, "I/O error on {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for CorpusError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CorpusError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Result alias for corpus operations.
pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_in_canonical_order_and_round_trip() {
        for (i, label) in EmotionLabel::ALL.iter().enumerate() {
            assert_eq!(label.index(), i);
            assert_eq!(EmotionLabel::from_index(i), Some(*label));
            assert_eq!(label.as_str().parse::<EmotionLabel>(), Ok(*label));
        }
        assert_eq!(EmotionLabel::from_index(7), None);
    }

    #[test]
    fn label_parse_is_case_insensitive() {
        assert_eq!("Angry".parse(), Ok(EmotionLabel::Angry));
        assert_eq!("SURPRISE".parse(), Ok(EmotionLabel::Surprise));
        assert_eq!(" neutral ".parse(), Ok(EmotionLabel::Neutral));
        assert!("joy".parse::<EmotionLabel>().is_err());
    }

    #[test]
    fn clip_rejects_invariant_violations() {
        let empty: Vec<f64> = vec![];
        assert!(matches!(
            AudioClip::new(empty, 16_000, "x"),
            Err(CorpusError::EmptyAudio(_))
        ));
        assert!(matches!(
            AudioClip::new(vec![0.0f64], 4_000, "x"),
            Err(CorpusError::InvalidSampleRate { hz: 4_000, .. })
        ));
        assert!(matches!(
            AudioClip::new(vec![0.0f64, 1.5], 16_000, "x"),
            Err(CorpusError::InvalidSample { index: 1, .. })
        ));
        assert!(matches!(
            AudioClip::new(vec![f64::NAN], 16_000, "x"),
            Err(CorpusError::InvalidSample { index: 0, .. })
        ));
        let clip = AudioClip::new(vec![0.0f64; 160], 16_000, "x").unwrap();
        assert!((clip.duration_s() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn relative_paths_resolve_against_manifest_dir() {
        let u = LabeledUtterance {
            clip_path: PathBuf::from("clips/a.wav"),
            label: EmotionLabel::Happy,
            speaker_id: "s01".into(),
        };
        assert_eq!(
            u.resolve(Path::new("/data")),
            PathBuf::from("/data/clips/a.wav")
        );
        let abs = LabeledUtterance {
            clip_path: PathBuf::from("/elsewhere/b.wav"),
            ..u
        };
        assert_eq!(abs.resolve(Path::new("/data")), PathBuf::from("/elsewhere/b.wav"));
    }
}
