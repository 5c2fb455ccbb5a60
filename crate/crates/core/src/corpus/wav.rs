//! Minimal RIFF/WAVE reader and writer.
//!
//! Reads 16-bit PCM and 32-bit IEEE-float files with one or two channels
//! (stereo is averaged to mono); writes 16-bit PCM mono. Everything is
//! little-endian per the RIFF container.

use std::io::ErrorKind;
use std::path::Path;

use crate::num::Real;

use super::{AudioClip, CorpusError, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

/// Scale between 16-bit PCM integers and normalized samples.
const PCM16_SCALE: f64 = 32_768.0;

/// Reads a WAV file into a normalized mono clip.
///
/// Stereo input is averaged to mono sample-by-sample. PCM samples are divided
/// by 32768; float samples are clamped to `[-1, 1]`.
pub fn read_wav<T: Real>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => CorpusError::MissingFile(path.to_path_buf()),
        _ => CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    decode_wav(&bytes, path)
}

/// Decodes WAV bytes; `path` is used only for error reporting.
fn decode_wav<T: Real>(bytes: &[u8], path: &Path) -> Result<AudioClip<T>> {
    let malformed = |detail: &str| CorpusError::MalformedWav {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let unsupported = |detail: String| CorpusError::UnsupportedEncoding {
        path: path.to_path_buf(),
        detail,
    };

    if bytes.len() < 12 {
        return Err(malformed("file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing WAVE form type"));
    }

    // Walk chunks for "fmt " and "data".
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| malformed("chunk size exceeds file length"))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(malformed("fmt chunk shorter than 16 bytes"));
                }
                let format = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => {
                data = Some(body);
            }
            _ => {} // skip LIST, fact, cue, ...
        }
        // Chunk bodies are word-aligned: odd sizes are padded with one byte.
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) = fmt.ok_or_else(|| malformed("no fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("no data chunk"))?;

    if channels == 0 || channels > 2 {
        return Err(unsupported(format!("{channels} channels (need 1 or 2)")));
    }
    let bytes_per_sample = match (format, bits) {
        (FORMAT_PCM, 16) => 2usize,
        (FORMAT_IEEE_FLOAT, 32) => 4usize,
        (FORMAT_PCM, other) => {
            return Err(unsupported(format!("{other}-bit PCM (need 16-bit)")));
        }
        (FORMAT_IEEE_FLOAT, other) => {
            return Err(unsupported(format!("{other}-bit float (need 32-bit)")));
        }
        (other, _) => {
            return Err(unsupported(format!("format tag {other} (need PCM or IEEE float)")));
        }
    };

    let frame_size = bytes_per_sample * channels as usize;
    if data.len() % frame_size != 0 {
        return Err(malformed("data chunk not a whole number of sample frames"));
    }
    let n_frames = data.len() / frame_size;
    if n_frames == 0 {
        return Err(CorpusError::EmptyAudio(path.to_path_buf()));
    }

    let mut samples = Vec::with_capacity(n_frames);
    for frame in 0..n_frames {
        let mut acc = 0.0f64;
        for ch in 0..channels as usize {
            let at = frame * frame_size + ch * bytes_per_sample;
            let v = match format {
                FORMAT_PCM => {
                    let raw = i16::from_le_bytes(data[at..at + 2].try_into().unwrap());
                    f64::from(raw) / PCM16_SCALE
                }
                _ => {
                    let raw = f32::from_le_bytes(data[at..at + 4].try_into().unwrap());
                    if !raw.is_finite() {
                        return Err(malformed("non-finite float sample"));
                    }
                    f64::from(raw).clamp(-1.0, 1.0)
                }
            };
            acc += v;
        }
        samples.push(T::of(acc / f64::from(channels)));
    }

    AudioClip::new(samples, rate, path)
}

/// Writes normalized mono samples as a 16-bit PCM WAV file.
///
/// Samples are quantized with `round(x * 32768)` clamped to the i16 range, so
/// a read-back differs from the input by at most one 16-bit quantization step.
pub fn write_wav<T: Real>(path: impl AsRef<Path>, samples: &[T], sample_rate_hz: u32) -> Result<()> {
    let path = path.as_ref();
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + samples.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes()); // fmt chunk size
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(sample_rate_hz * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        let q = (s.as_f64() * PCM16_SCALE).round().clamp(-32_768.0, 32_767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    std::fs::write(path, &out).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
