//! Per-dimension z-score standardization.

use serde::{Deserialize, Serialize};

use crate::num::Real;

use super::LearnerError;

/// Per-dimension z-score transform fitted on training data.
///
/// Uses the population standard deviation; dimensions with zero variance
/// store a std of 1 so they pass through unchanged (minus their mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub means: Vec<T>,
    pub stds: Vec<T>,
}

impl<T: Real> Standardizer<T> {
    /// Fits means and (population) stds over the rows of `x`.
    pub fn fit(x: &[Vec<T>]) -> Result<Self, LearnerError> {
        let n = x.len();
        if n == 0 {
            return Err(LearnerError::EmptyTrainingSet);
        }
        let dim = x[0].len();
        if let Some(row) = x.iter().find(|row| row.len() != dim) {
            return Err(LearnerError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        let inv_n = T::of(1.0 / n as f64);

        let mut means = vec![T::zero(); dim];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += *v;
            }
        }
        for m in means.iter_mut() {
            *m *= inv_n;
        }

        let mut stds = vec![T::zero(); dim];
        for row in x {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                let d = *v - *m;
                *s += d * d;
            }
        }
        for s in stds.iter_mut() {
            *s = (*s * inv_n).sqrt();
            if *s == T::zero() {
                *s = T::one();
            }
        }
        Ok(Standardizer { means, stds })
    }

    /// Feature dimension this transform was fitted on.
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Transforms one vector. Panics on a dimension mismatch; callers that
    /// take external input check dimensions first.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim(), "standardizer dimension mismatch");
        x.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (*v - *m) / *s)
            .collect()
    }

    /// Transforms a whole matrix.
    pub fn apply_matrix(&self, x: &[Vec<T>]) -> Vec<Vec<T>> {
        x.iter().map(|row| self.apply(row)).collect()
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn two_point_hand_example() {
        let s = Standardizer::fit(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(s.means, vec![1.0]);
        assert_eq!(s.stds, vec![1.0]); // population std of {0, 2}
        assert_eq!(s.apply(&[0.0]), vec![-1.0]);
        assert_eq!(s.apply(&[2.0]), vec![1.0]);
    }

    #[test]
    fn constant_column_passes_through_as_zeros() {
        let x = vec![vec![5.0, 1.0], vec![5.0, 3.0], vec![5.0, 2.0]];
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.stds[0], 1.0);
        for row in &x {
            assert_eq!(s.apply(row)[0], 0.0);
        }
    }

    #[test]
    fn transformed_training_data_is_zero_mean_unit_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        let s = Standardizer::fit(&x).unwrap();
        let z = s.apply_matrix(&x);
        for j in 0..3 {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / 40.0;
            let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 40.0;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_empty_and_ragged_input() {
        assert!(matches!(
            Standardizer::<f64>::fit(&[]),
            Err(LearnerError::EmptyTrainingSet)
        ));
        assert!(matches!(
            Standardizer::fit(&[vec![1.0, 2.0], vec![3.0]]),
            Err(LearnerError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
