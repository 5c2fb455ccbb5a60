//! Soft-margin RBF SVM trained by simplified SMO, with one-vs-one
//! multiclass on top.
//!
//! The trainer is Platt's simplified SMO: the first index comes from a
//! KKT-violation scan, the second is drawn uniformly from the seeded
//! generator. After `max_passes` consecutive sweeps without an update, a
//! full KKT audit runs over every training point; optimization resumes if
//! any violation remains, so the returned machine satisfies the KKT
//! conditions within `tol` on the whole training set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::num::Real;

use super::{LearnerError, SvmParams};

/// Multiplier snap width: an alpha within this of a box bound is set
/// exactly on the bound so the KKT case analysis stays clean.
const ALPHA_SNAP: f64 = 1e-12;
/// Alphas above this survive into the stored support set.
const SUPPORT_EPS: f64 = 1e-8;
/// Minimum step in the second multiplier for an update to count.
const MIN_ALPHA_STEP: f64 = 1e-5;
/// Hard cap on optimization sweeps; unreachable on the problem sizes this
/// crate trains, but guarantees termination.
const MAX_TOTAL_PASSES: usize = 1000;

/// A fitted binary machine: `f(x) = sum_i dual_coefs[i] * K(sv[i], x) + bias`
/// with `K(x, z) = exp(-gamma * ||x - z||^2)` and `dual_coefs[i] = alpha_i * y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmBinary<T> {
    pub support_vectors: Vec<Vec<T>>,
    pub dual_coefs: Vec<T>,
    pub bias: T,
    pub gamma: T,
}

impl<T: Real> SvmBinary<T> {
    /// Signed decision value; positive means the +1 class.
    pub fn decision(&self, x: &[T]) -> Result<T, LearnerError> {
        let dim = self.support_vectors.first().map_or(0, Vec::len);
        if x.len() != dim {
            return Err(LearnerError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let mut f = self.bias;
        for (sv, &coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            f += coef * rbf(self.gamma, sv, x);
        }
        Ok(f)
    }
}

fn rbf<T: Real>(gamma: T, a: &[T], b: &[T]) -> T {
    let mut sq = T::zero();
    for (&u, &v) in a.iter().zip(b) {
        let d = u - v;
        sq += d * d;
    }
    (-gamma * sq).exp()
}

/// Trains a binary machine on labels in {-1, +1}.
pub fn fit_svm_binary<T: Real>(
    x: &[Vec<T>],
    y: &[i8],
    params: &SvmParams,
) -> Result<SvmBinary<T>, LearnerError> {
    fit_svm_binary_stream(x, y, params, 0)
}

/// As [`fit_svm_binary`], with an explicit ChaCha stream so the one-vs-one
/// trainer can give every class pair an independent generator under one seed.
pub(crate) fn fit_svm_binary_stream<T: Real>(
    x: &[Vec<T>],
    y: &[i8],
    params: &SvmParams,
    stream: u64,
) -> Result<SvmBinary<T>, LearnerError> {
    params.validate()?;
    let n = x.len();
    if n == 0 {
        return Err(LearnerError::EmptyTrainingSet);
    }
    if y.len() != n {
        return Err(LearnerError::DimensionMismatch { expected: n, got: y.len() });
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(LearnerError::InvalidParams {
            detail: "training rows must have at least one feature".into(),
        });
    }
    for row in x {
        if row.len() != dim {
            return Err(LearnerError::DimensionMismatch { expected: dim, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::InvalidParams {
                detail: "non-finite feature value in training data".into(),
            });
        }
    }
    if y.iter().any(|&l| l != 1 && l != -1) {
        return Err(LearnerError::InvalidParams {
            detail: "binary SVM labels must be -1 or +1".into(),
        });
    }
    if !y.contains(&1) || !y.contains(&-1) {
        return Err(LearnerError::SingleClass);
    }

    let gamma = T::of(params.gamma.resolve(dim));
    let c = T::of(params.c);
    let tol = T::of(params.tol);
    let ys: Vec<T> = y.iter().map(|&l| T::of(f64::from(l))).collect();

    // Dense kernel matrix; training sets here are at most a few hundred rows.
    let kernel: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| rbf(gamma, &x[i], &x[j])).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stream);

    let mut alpha = vec![T::zero(); n];
    let mut bias = T::zero();
    let decision = |alpha: &[T], bias: T, i: usize| -> T {
        let mut f = bias;
        for j in 0..n {
            if alpha[j] != T::zero() {
                f += alpha[j] * ys[j] * kernel[i][j];
            }
        }
        f
    };

    let mut quiet_passes = 0;
    let mut total_passes = 0;
    while total_passes < MAX_TOTAL_PASSES {
        total_passes += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(&alpha, bias, i) - ys[i];
            let r_i = e_i * ys[i];
            // KKT screening: r < -tol needs alpha to grow, r > tol needs it
            // to shrink; anything else already satisfies the conditions.
            if !((r_i < -tol && alpha[i] < c) || (r_i > tol && alpha[i] > T::zero())) {
                continue;
            }
            // One uniform draw over the n-1 other indices.
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let e_j = decision(&alpha, bias, j) - ys[j];

            let (alpha_i_old, alpha_j_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if ys[i] == ys[j] {
                ((alpha_i_old + alpha_j_old - c).max(T::zero()), (alpha_i_old + alpha_j_old).min(c))
            } else {
                ((alpha_j_old - alpha_i_old).max(T::zero()), (c + alpha_j_old - alpha_i_old).min(c))
            };
            if lo == hi {
                continue;
            }
            let eta = T::of(2.0) * kernel[i][j] - kernel[i][i] - kernel[j][j];
            if eta >= T::zero() {
                continue;
            }

            let mut alpha_j = alpha_j_old - ys[j] * (e_i - e_j) / eta;
            alpha_j = alpha_j.max(lo).min(hi);
            alpha_j = snap(alpha_j, c);
            if (alpha_j - alpha_j_old).abs() < T::of(MIN_ALPHA_STEP) {
                continue;
            }
            let alpha_i = snap(alpha_i_old + ys[i] * ys[j] * (alpha_j_old - alpha_j), c);

            let d_i = ys[i] * (alpha_i - alpha_i_old);
            let d_j = ys[j] * (alpha_j - alpha_j_old);
            let b1 = bias - e_i - d_i * kernel[i][i] - d_j * kernel[i][j];
            let b2 = bias - e_j - d_i * kernel[i][j] - d_j * kernel[j][j];
            bias = if alpha_i > T::zero() && alpha_i < c {
                b1
            } else if alpha_j > T::zero() && alpha_j < c {
                b2
            } else {
                (b1 + b2) / T::of(2.0)
            };
            alpha[i] = alpha_i;
            alpha[j] = alpha_j;
            changed += 1;
        }

        if changed > 0 {
            quiet_passes = 0;
            continue;
        }
        quiet_passes += 1;
        if quiet_passes < params.max_passes {
            continue;
        }
        // Quiet long enough: audit the KKT conditions on every point and
        // only stop if none is violated.
        let violated = (0..n).any(|i| {
            let yf = ys[i] * decision(&alpha, bias, i);
            kkt_violated(alpha[i], yf, c, tol)
        });
        if !violated {
            break;
        }
        quiet_passes = 0;
    }

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        if alpha[i] > T::of(SUPPORT_EPS) {
            support_vectors.push(x[i].clone());
            dual_coefs.push(alpha[i] * ys[i]);
        }
    }
    Ok(SvmBinary { support_vectors, dual_coefs, bias, gamma })
}

/// Snaps a multiplier onto the box bounds when it lands within rounding
/// distance, so boundary/interior classification is exact downstream.
fn snap<T: Real>(a: T, c: T) -> T {
    if a < T::of(ALPHA_SNAP) {
        T::zero()
    } else if a > c - T::of(ALPHA_SNAP) {
        c
    } else {
        a
    }
}

/// The KKT conditions at tolerance `tol`:
/// alpha = 0 requires y*f >= 1 - tol; alpha = C requires y*f <= 1 + tol;
/// interior alphas require |y*f - 1| <= tol.
fn kkt_violated<T: Real>(alpha: T, yf: T, c: T, tol: T) -> bool {
    let one = T::one();
    if alpha == T::zero() {
        yf < one - tol
    } else if alpha == c {
        yf > one + tol
    } else {
        (yf - one).abs() > tol
    }
}

/// One machine per unordered class pair, in ascending (a, b) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMachine<T> {
    pub class_a: usize,
    pub class_b: usize,
    pub svm: SvmBinary<T>,
}

/// One-vs-one multiclass ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmMulticlass<T> {
    pub n_classes: usize,
    pub machines: Vec<PairMachine<T>>,
}

/// Trains C(n_classes, 2) binary machines; machine `p` (in ascending pair
/// order) uses ChaCha stream `p` of `params.seed`.
pub fn fit_svm_multiclass<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    n_classes: usize,
    params: &SvmParams,
) -> Result<SvmMulticlass<T>, LearnerError> {
    if n_classes < 2 {
        return Err(LearnerError::InvalidParams {
            detail: format!("multiclass SVM needs at least 2 classes, got {n_classes}"),
        });
    }
    if x.len() != y.len() {
        return Err(LearnerError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&label| label >= n_classes) {
        return Err(LearnerError::InvalidParams {
            detail: format!("label index {bad} outside vocabulary of {n_classes}"),
        });
    }

    let mut machines = Vec::with_capacity(n_classes * (n_classes - 1) / 2);
    let mut stream = 0u64;
    for a in 0..n_classes {
        for b in (a + 1)..n_classes {
            let mut px = Vec::new();
            let mut py = Vec::new();
            for (row, &label) in x.iter().zip(y) {
                if label == a {
                    px.push(row.clone());
                    py.push(1i8);
                } else if label == b {
                    px.push(row.clone());
                    py.push(-1i8);
                }
            }
            let svm = fit_svm_binary_stream(&px, &py, params, stream)?;
            machines.push(PairMachine { class_a: a, class_b: b, svm });
            stream += 1;
        }
    }
    Ok(SvmMulticlass { n_classes, machines })
}

/// Pairwise-vote prediction.
///
/// Each machine votes for one of its two classes (non-negative decision
/// votes the lower-indexed `class_a`). Returns (label, vote shares); vote
/// ties break by summed |decision value|, then lowest label index.
pub fn predict_svm<T: Real>(
    model: &SvmMulticlass<T>,
    x: &[T],
) -> Result<(usize, Vec<T>), LearnerError> {
    if model.machines.is_empty() {
        return Err(LearnerError::EmptyTrainingSet);
    }
    let mut votes = vec![0u64; model.n_classes];
    let mut magnitude = vec![T::zero(); model.n_classes];
    for pair in &model.machines {
        let d = pair.svm.decision(x)?;
        let winner = if d >= T::zero() { pair.class_a } else { pair.class_b };
        votes[winner] += 1;
        magnitude[winner] += d.abs();
    }
    let mut best = 0;
    for label in 1..model.n_classes {
        if votes[label] > votes[best]
            || (votes[label] == votes[best] && magnitude[label] > magnitude[best])
        {
            best = label;
        }
    }
    let inv = T::of(1.0 / model.machines.len() as f64);
    let scores = votes.iter().map(|&v| T::of(v as f64) * inv).collect();
    Ok((best, scores))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use crate::learners::GammaParam;

    use super::*;

    fn blobs(seed: u64, per_class: usize, centers: &[(f64, f64)]) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.6).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (label, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..per_class {
                x.push(vec![cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
                y.push(label);
            }
        }
        (x, y)
    }

    fn signed(y: &[usize]) -> Vec<i8> {
        y.iter().map(|&l| if l == 0 { 1 } else { -1 }).collect()
    }

    /// Reconstructs the full alpha vector from the sparse payload by
    /// matching support vectors back to training rows bit-for-bit.
    fn full_alphas(model: &SvmBinary<f64>, x: &[Vec<f64>]) -> Vec<f64> {
        let mut alphas = vec![0.0; x.len()];
        let mut used = vec![false; x.len()];
        for (sv, &coef) in model.support_vectors.iter().zip(&model.dual_coefs) {
            let i = x
                .iter()
                .enumerate()
                .position(|(i, row)| !used[i] && row == sv)
                .expect("every support vector is a training row");
            used[i] = true;
            alphas[i] = coef.abs();
        }
        alphas
    }

    /// Dual objective W(alpha) = sum(alpha) - 1/2 sum_ij a_i a_j y_i y_j K_ij.
    fn dual_objective(alpha: &[f64], x: &[Vec<f64>], y: &[i8], gamma: f64) -> f64 {
        let n = alpha.len();
        let mut w: f64 = alpha.iter().sum();
        for i in 0..n {
            if alpha[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if alpha[j] == 0.0 {
                    continue;
                }
                w -= 0.5
                    * alpha[i]
                    * alpha[j]
                    * f64::from(y[i])
                    * f64::from(y[j])
                    * rbf(gamma, &x[i], &x[j]);
            }
        }
        w
    }

    /// Projected-gradient ascent reference for the dual QP: gradient steps
    /// followed by exact projection onto the box-intersect-hyperplane
    /// feasible set (bisection on the hyperplane multiplier). Slow but
    /// independent of the SMO code path.
    fn reference_qp(x: &[Vec<f64>], y: &[i8], c: f64, gamma: f64, iters: usize) -> Vec<f64> {
        let n = x.len();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rbf(gamma, &x[i], &x[j])).collect())
            .collect();
        let yf: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();

        let project = |p: &[f64]| -> Vec<f64> {
            // Find lambda with sum_i y_i * clip(p_i - lambda*y_i, 0, C) = 0;
            // the sum is nonincreasing in lambda, so bisect.
            let residual = |lambda: f64| -> f64 {
                p.iter()
                    .zip(&yf)
                    .map(|(&pi, &yi)| yi * (pi - lambda * yi).clamp(0.0, c))
                    .sum()
            };
            let bound = c + p.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if residual(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let lambda = 0.5 * (lo + hi);
            p.iter()
                .zip(&yf)
                .map(|(&pi, &yi)| (pi - lambda * yi).clamp(0.0, c))
                .collect()
        };

        let mut alpha = project(&vec![0.0; n]);
        let step = 1.0 / n as f64; // K has unit diagonal, so ||Q||_2 <= n
        for _ in 0..iters {
            let grad: Vec<f64> = (0..n)
                .map(|i| {
                    let mut g = 1.0;
                    for j in 0..n {
                        g -= alpha[j] * yf[i] * yf[j] * k[i][j];
                    }
                    g
                })
                .collect();
            let stepped: Vec<f64> = alpha
                .iter()
                .zip(&grad)
                .map(|(&a, &g)| a + step * g)
                .collect();
            alpha = project(&stepped);
        }
        alpha
    }

    #[test]
    fn symmetric_two_point_problem_balances_at_zero() {
        let x = vec![vec![-1.0], vec![1.0]];
        let y = vec![-1i8, 1];
        let params = SvmParams { c: 1e6, ..SvmParams::default() };
        let model = fit_svm_binary(&x, &y, &params).unwrap();
        let mid = model.decision(&[0.0]).unwrap();
        assert_abs_diff_eq!(mid, 0.0, epsilon = 1e-6);
        assert!(model.decision(&[1.0]).unwrap() > 0.0);
        assert!(model.decision(&[-1.0]).unwrap() < 0.0);
    }

    #[test]
    fn dual_feasibility_holds_after_training() {
        let (x, yl) = blobs(31, 30, &[(0.0, 0.0), (4.0, 4.0)]);
        let y = signed(&yl);
        let params = SvmParams::default();
        let model = fit_svm_binary(&x, &y, &params).unwrap();
        assert!(!model.support_vectors.is_empty());
        for &coef in &model.dual_coefs {
            assert!(coef.abs() <= params.c + 1e-12, "|alpha y| = {} > C", coef.abs());
            assert!(coef.abs() > 1e-8);
        }
        let sum: f64 = model.dual_coefs.iter().sum();
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn kkt_conditions_hold_on_every_training_point() {
        let (x, yl) = blobs(32, 20, &[(0.0, 0.0), (3.0, 3.0)]);
        let y = signed(&yl);
        let params = SvmParams::default();
        let model = fit_svm_binary(&x, &y, &params).unwrap();
        let alphas = full_alphas(&model, &x);
        for i in 0..x.len() {
            let yf = f64::from(y[i]) * model.decision(&x[i]).unwrap();
            let a = alphas[i];
            if a == 0.0 {
                assert!(yf >= 1.0 - params.tol, "alpha=0 point {i} has y*f = {yf}");
            } else if a == params.c {
                assert!(yf <= 1.0 + params.tol, "alpha=C point {i} has y*f = {yf}");
            } else {
                assert!(
                    (yf - 1.0).abs() <= params.tol,
                    "interior point {i} (alpha={a}) has y*f = {yf}"
                );
            }
        }
    }

    #[test]
    fn objective_matches_projected_gradient_reference() {
        let (x, yl) = blobs(33, 20, &[(0.0, 0.0), (3.5, 3.5)]);
        let y = signed(&yl);
        assert_eq!(x.len(), 40);
        let params = SvmParams::default();
        let gamma = params.gamma.resolve(2);
        let model = fit_svm_binary(&x, &y, &params).unwrap();

        // Separable problem: perfect training accuracy.
        for (row, &label) in x.iter().zip(&y) {
            let d = model.decision(row).unwrap();
            assert_eq!(d > 0.0, label > 0, "training point misclassified");
        }

        let w_smo = dual_objective(&full_alphas(&model, &x), &x, &y, gamma);
        let alpha_ref = reference_qp(&x, &y, params.c, gamma, 20_000);
        let w_ref = dual_objective(&alpha_ref, &x, &y, gamma);
        let rel = (w_smo - w_ref).abs() / w_ref.abs();
        assert!(
            rel <= 0.01,
            "SMO objective {w_smo} vs reference {w_ref} (relative gap {rel:.4})"
        );
    }

    #[test]
    fn gamma_auto_resolves_to_inverse_dimension() {
        assert_eq!(GammaParam::Auto.resolve(2), 0.5);
        assert_eq!(GammaParam::Auto.resolve(32), 1.0 / 32.0);
        assert_eq!(GammaParam::Value(0.7).resolve(32), 0.7);
        let (x, yl) = blobs(34, 10, &[(0.0, 0.0), (4.0, 4.0)]);
        let model = fit_svm_binary(&x, &signed(&yl), &SvmParams::default()).unwrap();
        assert_eq!(model.gamma, 0.5);
    }

    #[test]
    fn single_class_input_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            fit_svm_binary(&x, &[1, 1], &SvmParams::default()),
            Err(LearnerError::SingleClass)
        ));
        assert!(matches!(
            fit_svm_binary(&x, &[0, 1], &SvmParams::default()),
            Err(LearnerError::InvalidParams { .. })
        ));
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let (x, yl) = blobs(35, 25, &[(0.0, 0.0), (3.0, 3.0)]);
        let y = signed(&yl);
        let a = fit_svm_binary(&x, &y, &SvmParams::default()).unwrap();
        let b = fit_svm_binary(&x, &y, &SvmParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pair_machine_counts_and_ordering() {
        let (x, y) = blobs(36, 8, &[(0.0, 0.0), (5.0, 0.0), (0.0, 5.0), (5.0, 5.0)]);
        let model = fit_svm_multiclass(&x, &y, 4, &SvmParams::default()).unwrap();
        assert_eq!(model.machines.len(), 6);
        let pairs: Vec<(usize, usize)> = model
            .machines
            .iter()
            .map(|m| (m.class_a, m.class_b))
            .collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);

        let two = fit_svm_multiclass(&x[..16], &y[..16], 2, &SvmParams::default()).unwrap();
        assert_eq!(two.machines.len(), 1);
    }

    #[test]
    fn two_class_multiclass_equals_the_binary_machine() {
        let (x, y) = blobs(37, 20, &[(0.0, 0.0), (4.0, 4.0)]);
        let multi = fit_svm_multiclass(&x, &y, 2, &SvmParams::default()).unwrap();
        let binary = fit_svm_binary(&x, &signed(&y), &SvmParams::default()).unwrap();
        assert_eq!(multi.machines[0].svm, binary);

        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..50 {
            let probe = vec![rng.gen_range(-2.0..6.0), rng.gen_range(-2.0..6.0)];
            let (label, scores) = predict_svm(&multi, &probe).unwrap();
            let d = binary.decision(&probe).unwrap();
            assert_eq!(label, usize::from(d < 0.0));
            assert_eq!(scores.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn three_separated_blobs_classify_nearly_perfectly() {
        let centers = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)];
        let (x, y) = blobs(39, 40, &centers);
        let (tx, ty) = blobs(40, 25, &centers);
        let model = fit_svm_multiclass(&x, &y, 3, &SvmParams::default()).unwrap();
        let correct = tx
            .iter()
            .zip(&ty)
            .filter(|(probe, &label)| predict_svm(&model, probe).unwrap().0 == label)
            .count();
        assert!(
            correct as f64 / ty.len() as f64 >= 0.99,
            "held-out accuracy {correct}/{}",
            ty.len()
        );
    }

    #[test]
    fn vote_shares_sum_to_one() {
        let (x, y) = blobs(41, 10, &[(0.0, 0.0), (5.0, 0.0), (0.0, 5.0)]);
        let model = fit_svm_multiclass(&x, &y, 3, &SvmParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let probe = vec![rng.gen_range(-3.0..8.0), rng.gen_range(-3.0..8.0)];
            let (label, scores) = predict_svm(&model, &probe).unwrap();
            assert_abs_diff_eq!(scores.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            let max = scores.iter().cloned().fold(f64::MIN, f64::max);
            assert_eq!(scores[label], max);
        }
    }

    #[test]
    fn serde_round_trip() {
        let (x, y) = blobs(43, 10, &[(0.0, 0.0), (4.0, 4.0)]);
        let model = fit_svm_multiclass(&x, &y, 2, &SvmParams::default()).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: SvmMulticlass<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
