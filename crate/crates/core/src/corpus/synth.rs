//! Deterministic synthetic emotion corpus.
//!
//! Each class is a harmonic tone with class-specific fundamental frequency,
//! harmonic count, amplitude-modulation rate, and noise level. Per-utterance
//! variation (fundamental jitter, phases, noise) comes from a seeded
//! generator, so the same spec always produces byte-identical WAV files.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    save_manifest, write_wav, CorpusError, EmotionLabel, LabeledUtterance, Result,
    MAX_SAMPLE_RATE_HZ, MIN_SAMPLE_RATE_HZ,
};

/// Fraction of full scale the peak sample is normalized to before
/// quantization, leaving headroom against clipping.
const PEAK_LEVEL: f64 = 0.85;

/// Depth of the amplitude modulation envelope `1 + DEPTH * sin(...)`.
const AM_DEPTH: f64 = 0.5;

/// Relative half-width of the per-utterance fundamental jitter.
const F0_JITTER: f64 = 0.03;

/// Number of rotating placeholder speaker ids assigned to generated files.
const SYNTH_SPEAKERS: usize = 4;

/// Signal parameters for one synthetic emotion class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSynthParams {
    /// Fundamental frequency in Hz.
    pub fundamental_hz: f64,
    /// Number of harmonics (including the fundamental), amplitudes 1/h.
    pub harmonics: u32,
    /// Amplitude-modulation rate in Hz.
    pub am_rate_hz: f64,
    /// Signal-to-noise ratio of the added Gaussian noise, in dB.
    pub snr_db: f64,
}

/// Full description of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub utterances_per_class: usize,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub seed: u64,
    /// Per-class signal parameters; iteration follows canonical label order.
    pub classes: BTreeMap<EmotionLabel, ClassSynthParams>,
}

impl Default for SynthSpec {
    /// Seven separable classes. Fundamentals, harmonic counts, modulation
    /// rates, and noise levels are all distinct, which keeps every pair of
    /// classes far apart in feature space (neutral and fear carry the
    /// 120 Hz / 300 Hz fundamentals).
    fn default() -> Self {
        let p = |fundamental_hz, harmonics, am_rate_hz, snr_db| ClassSynthParams {
            fundamental_hz,
            harmonics,
            am_rate_hz,
            snr_db,
        };
        let classes = BTreeMap::from([
            (EmotionLabel::Angry, p(220.0, 8, 6.0, 25.0)),
            (EmotionLabel::Disgust, p(140.0, 5, 2.5, 18.0)),
            (EmotionLabel::Fear, p(300.0, 3, 9.0, 12.0)),
            (EmotionLabel::Happy, p(260.0, 6, 4.5, 22.0)),
            (EmotionLabel::Neutral, p(120.0, 2, 0.5, 30.0)),
            (EmotionLabel::Sad, p(100.0, 4, 1.2, 20.0)),
            (EmotionLabel::Surprise, p(340.0, 7, 7.5, 15.0)),
        ]);
        SynthSpec {
            utterances_per_class: 100,
            duration_s: 2.0,
            sample_rate_hz: 16_000,
            seed: 42,
            classes,
        }
    }
}

impl SynthSpec {
    /// Checks the spec invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |detail: String| Err(CorpusError::InvalidSynthSpec(detail));
        if self.classes.is_empty() {
            return fail("no classes".into());
        }
        if self.utterances_per_class == 0 {
            return fail("utterances_per_class must be at least 1".into());
        }
        if !(0.5..=8.0).contains(&self.duration_s) {
            return fail(format!("duration_s {} outside [0.5, 8]", self.duration_s));
        }
        if !(MIN_SAMPLE_RATE_HZ..=MAX_SAMPLE_RATE_HZ).contains(&self.sample_rate_hz) {
            return fail(format!("sample_rate_hz {} outside supported range", self.sample_rate_hz));
        }
        let nyquist = f64::from(self.sample_rate_hz) / 2.0;
        for (label, p) in &self.classes {
            if p.fundamental_hz <= 0.0 || p.harmonics == 0 {
                return fail(format!("{label}: fundamental and harmonics must be positive"));
            }
            if p.fundamental_hz * f64::from(p.harmonics) >= nyquist {
                return fail(format!("{label}: highest harmonic at or above Nyquist ({nyquist} Hz)"));
            }
            if p.am_rate_hz < 0.0 || p.am_rate_hz >= nyquist {
                return fail(format!("{label}: am_rate_hz outside [0, Nyquist)"));
            }
            if !p.snr_db.is_finite() {
                return fail(format!("{label}: snr_db must be finite"));
            }
        }
        let params: Vec<&ClassSynthParams> = self.classes.values().collect();
        for i in 0..params.len() {
            for j in i + 1..params.len() {
                if params[i] == params[j] {
                    return fail("two classes share identical signal parameters".into());
                }
            }
        }
        Ok(())
    }
}

/// Generates WAV files plus a manifest under `out_dir`; returns the manifest
/// path.
///
/// File `{label}_{index}.wav` gets speaker id `s01`..`s04` by index rotation.
/// Each utterance draws from its own generator stream keyed on
/// `(spec.seed, label index, utterance index)`, so output is byte-identical
/// across runs and independent of generation order.
pub fn generate_synthetic_corpus(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| CorpusError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;

    let n_samples = (spec.duration_s * f64::from(spec.sample_rate_hz)).round() as usize;
    let mut entries = Vec::with_capacity(spec.classes.len() * spec.utterances_per_class);
    for (label, params) in &spec.classes {
        for u in 0..spec.utterances_per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(((label.index() as u64) << 32) | u as u64);
            let samples = synth_signal(params, n_samples, f64::from(spec.sample_rate_hz), &mut rng);
            let file_name = format!("{label}_{u:03}.wav");
            write_wav(out_dir.join(&file_name), &samples, spec.sample_rate_hz)?;
            entries.push(LabeledUtterance {
                clip_path: PathBuf::from(file_name),
                label: *label,
                speaker_id: format!("s{:02}", u % SYNTH_SPEAKERS + 1),
            });
        }
    }
    let manifest_path = out_dir.join("manifest.csv");
    save_manifest(&manifest_path, &entries)?;
    Ok(manifest_path)
}

/// Renders one utterance. The draw order (fundamental jitter, one phase per
/// harmonic, modulation phase, then noise samples) is part of the format:
/// changing it changes generated corpora.
fn synth_signal(params: &ClassSynthParams, n: usize, sample_rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let f0 = params.fundamental_hz * (1.0 + rng.gen_range(-F0_JITTER..F0_JITTER));
    let phases: Vec<f64> = (0..params.harmonics).map(|_| rng.gen_range(0.0..TAU)).collect();
    let am_phase = rng.gen_range(0.0..TAU);

    let mut signal = vec![0.0f64; n];
    for (h, phase) in phases.iter().enumerate() {
        let k = (h + 1) as f64;
        let amp = 1.0 / k;
        let w = TAU * k * f0 / sample_rate;
        for (t, s) in signal.iter_mut().enumerate() {
            *s += amp * (w * t as f64 + phase).sin();
        }
    }
    let am_w = TAU * params.am_rate_hz / sample_rate;
    for (t, s) in signal.iter_mut().enumerate() {
        *s *= 1.0 + AM_DEPTH * (am_w * t as f64 + am_phase).sin();
    }

    let rms = (signal.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
    let sigma = rms / 10f64.powf(params.snr_db / 20.0);
    let noise = Normal::new(0.0, sigma).expect("finite noise sigma");
    for s in signal.iter_mut() {
        *s += noise.sample(rng);
    }

    let peak = signal.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let scale = PEAK_LEVEL / peak;
        for s in signal.iter_mut() {
            *s *= scale;
        }
    }
    signal
}
