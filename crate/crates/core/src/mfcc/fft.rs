//! Iterative radix-2 FFT with a precomputed twiddle table.
//!
//! Frame lengths are always padded to a power of two, so radix-2 is all the
//! pipeline needs. A hand-rolled kernel keeps the arithmetic identical on
//! every platform, which the byte-level determinism contract relies on.

use std::f64::consts::TAU;

use crate::num::Real;

/// Forward FFT plan for one transform size.
pub(crate) struct FftPlan<T> {
    n: usize,
    /// Twiddles `e^{-2*pi*i*k/n}` for `k` in `0..n/2`.
    twiddle_re: Vec<T>,
    twiddle_im: Vec<T>,
}

impl<T: Real> FftPlan<T> {
    /// Builds a plan for a power-of-two size (size 1 is allowed).
    pub(crate) fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT size must be a power of two");
        let half = n / 2;
        let mut twiddle_re = Vec::with_capacity(half);
        let mut twiddle_im = Vec::with_capacity(half);
        for k in 0..half {
            let angle = -TAU * k as f64 / n as f64;
            twiddle_re.push(T::of(angle.cos()));
            twiddle_im.push(T::of(angle.sin()));
        }
        FftPlan { n, twiddle_re, twiddle_im }
    }

    /// In-place forward transform of `re + i*im`, both of length `n`.
    pub(crate) fn forward(&self, re: &mut [T], im: &mut [T]) {
        let n = self.n;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        if n < 2 {
            return;
        }

        // Bit-reversal permutation.
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
        }

        // Butterflies, indexing the shared twiddle table with a stride.
        let mut len = 2usize;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let wr = self.twiddle_re[k * stride];
                    let wi = self.twiddle_im[k * stride];
                    let i0 = start + k;
                    let i1 = start + k + len / 2;
                    let vr = re[i1] * wr - im[i1] * wi;
                    let vi = re[i1] * wi + im[i1] * wr;
                    re[i1] = re[i0] - vr;
                    im[i1] = im[i0] - vi;
                    re[i0] += vr;
                    im[i0] += vi;
                }
            }
            len <<= 1;
        }
    }
}

/// Smallest power of two that is at least `n`.
pub(crate) fn next_power_of_two(n: usize) -> usize {
    n.next_power_of_two()
}
