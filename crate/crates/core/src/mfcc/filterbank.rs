//! Mel scale conversions and the triangular mel filterbank.

use serde::{Deserialize, Serialize};

use crate::num::Real;

use super::MfccError;

/// Converts Hz to mel: `2595 * log10(1 + f/700)`.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

/// Inverse of [`hz_to_mel`].
pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank sampled on FFT bin frequencies.
///
/// Filters are built from `n_mels + 2` mel-equispaced edge points; filter `m`
/// rises linearly (in Hz) from edge `m` to a peak of 1 at edge `m + 1` and
/// falls back to zero at edge `m + 2`. Rows are not normalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MelFilterbank<T> {
    /// `n_mels` rows of `n_fft/2 + 1` weights.
    weights: Vec<Vec<T>>,
    /// Support of each row: bins outside `[lo, hi)` are zero.
    support: Vec<(usize, usize)>,
    /// Center frequency (edge point `m + 1`) of each filter, in Hz.
    center_hz: Vec<f64>,
    n_bins: usize,
}

impl<T: Real> MelFilterbank<T> {
    /// Builds the filterbank for a sample rate and FFT size.
    ///
    /// Fails with [`MfccError::DegenerateFilter`] if two adjacent edge points
    /// collapse onto the same FFT bin (the mel resolution exceeds what the
    /// FFT can carry).
    pub fn new(
        sample_rate_hz: u32,
        n_fft: usize,
        n_mels: usize,
        fmin_hz: f64,
        fmax_hz: f64,
    ) -> Result<Self, MfccError> {
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        if n_mels == 0 {
            return Err(MfccError::InvalidConfig {
                field: "n_mels",
                detail: "must be at least 1".into(),
            });
        }
        if !(0.0..nyquist).contains(&fmin_hz) || fmax_hz <= fmin_hz || fmax_hz > nyquist {
            return Err(MfccError::InvalidConfig {
                field: "fmin_hz/fmax_hz",
                detail: format!("need 0 <= fmin < fmax <= Nyquist ({nyquist} Hz)"),
            });
        }

        let mel_lo = hz_to_mel(fmin_hz);
        let mel_hi = hz_to_mel(fmax_hz);
        let n_edges = n_mels + 2;
        let edges_hz: Vec<f64> = (0..n_edges)
            .map(|i| {
                let mel = mel_lo + (mel_hi - mel_lo) * i as f64 / (n_edges - 1) as f64;
                mel_to_hz(mel)
            })
            .collect();

        let bin_width = f64::from(sample_rate_hz) / n_fft as f64;
        for (i, w) in edges_hz.windows(2).enumerate() {
            if (w[0] / bin_width).floor() == (w[1] / bin_width).floor() {
                return Err(MfccError::DegenerateFilter { edge_point: i });
            }
        }

        let n_bins = n_fft / 2 + 1;
        let mut weights = Vec::with_capacity(n_mels);
        let mut support = Vec::with_capacity(n_mels);
        for m in 0..n_mels {
            let (lo, center, hi) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
            let mut row = vec![T::zero(); n_bins];
            let mut first = n_bins;
            let mut last = 0usize;
            for (k, w) in row.iter_mut().enumerate() {
                let f = k as f64 * bin_width;
                let tri = if f <= lo || f >= hi {
                    0.0
                } else if f <= center {
                    (f - lo) / (center - lo)
                } else {
                    (hi - f) / (hi - center)
                };
                if tri > 0.0 {
                    *w = T::of(tri);
                    first = first.min(k);
                    last = k + 1;
                }
            }
            weights.push(row);
            support.push((first.min(last), last));
        }

        Ok(MelFilterbank {
            weights,
            support,
            center_hz: edges_hz[1..=n_mels].to_vec(),
            n_bins,
        })
    }

    pub fn n_filters(&self) -> usize {
        self.weights.len()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Center frequencies in Hz, one per filter, strictly increasing.
    pub fn center_frequencies_hz(&self) -> &[f64] {
        &self.center_hz
    }

    /// Weight rows (mostly zero outside each filter's band).
    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    /// Applies the bank to a power spectrum of `n_fft/2 + 1` bins.
    pub fn apply(&self, power: &[T]) -> Result<Vec<T>, MfccError> {
        if power.len() != self.n_bins {
            return Err(MfccError::InvalidConfig {
                field: "power spectrum",
                detail: format!("expected {} bins, got {}", self.n_bins, power.len()),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.support)
            .map(|(row, &(lo, hi))| {
                let mut acc = T::zero();
                for k in lo..hi {
                    acc += row[k] * power[k];
                }
                acc
            })
            .collect())
    }
}
