//! Random forest: bagged CART trees with per-node feature subsampling.
//!
//! Tree `i` owns an independent generator derived from `(seed, i)` (a
//! ChaCha stream per tree), so trees could be trained in any order — or
//! concurrently — with identical results. Within a tree, the generator is
//! consumed in a fixed order: the bootstrap draw first, then one feature
//! subset per node in depth-first, left-before-right construction order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num::Real;

use super::tree::{fit_tree_sampled, predict_tree, TreeNode};
use super::{ForestParams, LearnerError, MaxFeatures};

/// Fits `params.n_trees` trees. Label indices must be < `n_classes`.
pub fn fit_forest<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
) -> Result<Vec<TreeNode<T>>, LearnerError> {
    // Delegate input validation to a throwaway single-leaf fit so the
    // checks live in one place.
    super::tree::fit_tree(
        x,
        y,
        n_classes,
        &super::TreeParams { max_depth: 1, min_samples_leaf: x.len() },
        None,
    )?;
    params.validate()?;
    let dim = x[0].len();
    let k = params.max_features.resolve(dim)?;
    let n = x.len();

    let mut trees = Vec::with_capacity(params.n_trees);
    for i in 0..params.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(i as u64);

        let (bx, by): (Vec<Vec<T>>, Vec<usize>) = if params.bootstrap {
            (0..n)
                .map(|_| {
                    let j = rng.gen_range(0..n);
                    (x[j].clone(), y[j])
                })
                .unzip()
        } else {
            (x.to_vec(), y.to_vec())
        };

        let tree = fit_tree_sampled(&bx, &by, n_classes, &params.tree_params, || {
            if k >= dim {
                None // all features allowed; no draw consumed
            } else {
                Some(sample_features(&mut rng, dim, k))
            }
        });
        trees.push(tree);
    }
    Ok(trees)
}

/// Draws `k` distinct feature indices from `0..dim` (partial Fisher-Yates),
/// returned sorted so the split scan visits them in ascending order.
fn sample_features(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..dim).collect();
    for slot in 0..k {
        let pick = rng.gen_range(slot..dim);
        pool.swap(slot, pick);
    }
    let mut chosen = pool[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Majority vote over the trees' hard predictions.
///
/// Returns (label, vote fractions); the label is the argmax of the vote
/// fractions with ties going to the lowest label index.
pub fn predict_forest<T: Real>(
    trees: &[TreeNode<T>],
    n_classes: usize,
    x: &[T],
) -> Result<(usize, Vec<T>), LearnerError> {
    if trees.is_empty() {
        return Err(LearnerError::EmptyTrainingSet);
    }
    let mut votes = vec![0u64; n_classes];
    for tree in trees {
        let (label, _) = predict_tree(tree, x)?;
        votes[label] += 1;
    }
    let mut best = 0;
    for (label, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[best] {
            best = label;
        }
    }
    let inv = T::of(1.0 / trees.len() as f64);
    let proba = votes.iter().map(|&v| T::of(v as f64) * inv).collect();
    Ok((best, proba))
}

impl MaxFeatures {
    /// Resolves to a concrete subset size in `[1, dim]`.
    pub fn resolve(self, dim: usize) -> Result<usize, LearnerError> {
        match self {
            MaxFeatures::Sqrt => Ok(((dim as f64).sqrt().floor() as usize).max(1)),
            MaxFeatures::Exact(k) => {
                if k == 0 || k > dim {
                    Err(LearnerError::InvalidParams {
                        detail: format!("max_features {k} outside [1, {dim}]"),
                    })
                } else {
                    Ok(k)
                }
            }
        }
    }
}
