//! CART decision tree with Gini impurity.
//!
//! Split search is greedy: at each node, every (allowed) feature's candidate
//! thresholds — midpoints between consecutive distinct sorted values — are
//! scored by weighted child Gini, computed with exact integer arithmetic so
//! tie-breaking (lowest feature index, then lowest threshold) is reproducible
//! across platforms.

use serde::{Deserialize, Serialize};

use crate::num::Real;

use super::{LearnerError, TreeParams};

/// A fitted tree node: either a split or a leaf holding training counts.
///
/// Splits route `x` left iff `x[feature_index] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode<T> {
    Leaf {
        label_index: usize,
        class_counts: Vec<u64>,
    },
    Split {
        feature_index: usize,
        threshold: T,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
}

impl<T> TreeNode<T> {
    /// Depth of the tree (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Number of leaves.
    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

/// Gini impurity `1 - sum((c_i / total)^2)` of a count vector.
pub fn gini(counts: &[u64]) -> Result<f64, LearnerError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(LearnerError::EmptyNode);
    }
    let sum_sq: u128 = counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum();
    Ok(1.0 - sum_sq as f64 / (u128::from(total) * u128::from(total)) as f64)
}

/// Fits a tree on `x`/`y` (label indices < `n_classes`).
///
/// `allowed_features` restricts every split to that feature set; `None`
/// allows all features.
pub fn fit_tree<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    n_classes: usize,
    params: &TreeParams,
    allowed_features: Option<&[usize]>,
) -> Result<TreeNode<T>, LearnerError> {
    validate_training_set(x, y, n_classes)?;
    params.validate()?;
    let all: Vec<usize> = (0..x[0].len()).collect();
    let fixed: Vec<usize> = match allowed_features {
        Some(set) => {
            let mut set = set.to_vec();
            set.sort_unstable();
            set.dedup();
            if set.iter().any(|&f| f >= x[0].len()) {
                return Err(LearnerError::DimensionMismatch {
                    expected: x[0].len(),
                    got: set.last().copied().unwrap_or(0) + 1,
                });
            }
            if set.is_empty() {
                all
            } else {
                set
            }
        }
        None => all,
    };
    Ok(fit_tree_sampled(x, y, n_classes, params, || {
        Some(fixed.clone())
    }))
}

/// Tree construction with a per-node feature sampler (used by the forest to
/// draw a fresh random subset at every node). The sampler must return sorted
/// feature indices; `None` means all features. Inputs are assumed validated.
pub(crate) fn fit_tree_sampled<T: Real, F>(
    x: &[Vec<T>],
    y: &[usize],
    n_classes: usize,
    params: &TreeParams,
    mut sample_features: F,
) -> TreeNode<T>
where
    F: FnMut() -> Option<Vec<usize>>,
{
    let indices: Vec<usize> = (0..x.len()).collect();
    let mut builder = TreeBuilder {
        x,
        y,
        n_classes,
        params,
        sample_features: &mut sample_features,
    };
    builder.build(indices, 0)
}

fn validate_training_set<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    n_classes: usize,
) -> Result<(), LearnerError> {
    if x.is_empty() {
        return Err(LearnerError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(LearnerError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(LearnerError::InvalidParams {
            detail: "feature dimension is zero".into(),
        });
    }
    for row in x {
        if row.len() != dim {
            return Err(LearnerError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::InvalidParams {
                detail: "non-finite feature value in training data".into(),
            });
        }
    }
    if let Some(&bad) = y.iter().find(|&&label| label >= n_classes) {
        return Err(LearnerError::InvalidParams {
            detail: format!("label index {bad} outside vocabulary of {n_classes}"),
        });
    }
    Ok(())
}

struct TreeBuilder<'a, T, F> {
    x: &'a [Vec<T>],
    y: &'a [usize],
    n_classes: usize,
    params: &'a TreeParams,
    sample_features: &'a mut F,
}

/// A candidate split's quality, compared exactly.
///
/// Minimizing weighted child Gini is equivalent to maximizing
/// `S = sumsq_left/n_left + sumsq_right/n_right` (where sumsq is the sum of
/// squared class counts), kept as the integer fraction
/// `(sumsq_left*n_right + sumsq_right*n_left) / (n_left*n_right)` so
/// comparisons never touch floating point.
#[derive(Clone, Copy)]
struct SplitScore {
    numer: u128,
    denom: u128,
}

impl SplitScore {
    fn better_than(self, other: SplitScore) -> bool {
        self.numer * other.denom > other.numer * self.denom
    }
}

struct BestSplit<T> {
    feature: usize,
    threshold: T,
    score: SplitScore,
}

impl<T: Real, F> TreeBuilder<'_, T, F>
where
    F: FnMut() -> Option<Vec<usize>>,
{
    fn build(&mut self, indices: Vec<usize>, depth: usize) -> TreeNode<T> {
        let counts = self.count_labels(&indices);
        let leaf = || TreeNode::Leaf {
            label_index: majority(&counts),
            class_counts: counts.clone(),
        };

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure
            || depth >= self.params.max_depth
            || indices.len() < 2 * self.params.min_samples_leaf
        {
            return leaf();
        }

        let features = (self.sample_features)();
        let best = match self.find_best_split(&indices, &counts, features.as_deref()) {
            Some(best) => best,
            None => return leaf(),
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.x[i][best.feature] <= best.threshold);
        debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

        TreeNode::Split {
            feature_index: best.feature,
            threshold: best.threshold,
            left: Box::new(self.build(left_idx, depth + 1)),
            right: Box::new(self.build(right_idx, depth + 1)),
        }
    }

    fn count_labels(&self, indices: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_classes];
        for &i in indices {
            counts[self.y[i]] += 1;
        }
        counts
    }

    /// Scans all candidate thresholds of the given features. Features are
    /// visited in ascending order and thresholds in ascending value order,
    /// and only strictly better scores replace the incumbent, so ties
    /// resolve to the lowest feature index, then the lowest threshold.
    ///
    /// Every candidate is kept: a binary partition never worsens weighted
    /// Gini (Cauchy–Schwarz), and accepting the zero-improvement ties is
    /// what lets a later level finish the job on XOR-like data. Recursion
    /// stays bounded because children are strictly smaller and depth is
    /// capped.
    fn find_best_split(
        &self,
        indices: &[usize],
        parent_counts: &[u64],
        features: Option<&[usize]>,
    ) -> Option<BestSplit<T>> {
        let n = indices.len();
        let min_leaf = self.params.min_samples_leaf;
        let parent_sum_sq: u128 = parent_counts
            .iter()
            .map(|&c| u128::from(c) * u128::from(c))
            .sum();

        let all: Vec<usize>;
        let features = match features {
            Some(f) => f,
            None => {
                all = (0..self.x[0].len()).collect();
                &all
            }
        };

        let mut best: Option<BestSplit<T>> = None;
        let mut sorted = indices.to_vec();
        for &feature in features {
            sorted.sort_unstable_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .expect("finite features compare")
            });

            let mut left_counts = vec![0u64; self.n_classes];
            let mut sum_sq_left: u128 = 0;
            let mut sum_sq_right = parent_sum_sq;
            for (pos, &i) in sorted.iter().enumerate().take(n - 1) {
                // Move sample i from the right partition to the left;
                // (c+1)^2 - c^2 = 2c + 1 and (c-1)^2 - c^2 = -(2c - 1).
                let label = self.y[i];
                let c_left = u128::from(left_counts[label]);
                let c_right = u128::from(parent_counts[label]) - c_left;
                sum_sq_left += 2 * c_left + 1;
                sum_sq_right -= 2 * c_right - 1;
                left_counts[label] += 1;

                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let v = self.x[i][feature];
                let v_next = self.x[sorted[pos + 1]][feature];
                if v >= v_next {
                    continue; // not a boundary between distinct values
                }
                let threshold = (v + v_next) / (T::one() + T::one());
                if threshold >= v_next {
                    continue; // adjacent floats leave no representable midpoint
                }
                let score = SplitScore {
                    numer: sum_sq_left * n_right as u128 + sum_sq_right * n_left as u128,
                    denom: (n_left as u128) * (n_right as u128),
                };
                let is_better = match &best {
                    Some(b) => score.better_than(b.score),
                    None => true,
                };
                if is_better {
                    best = Some(BestSplit { feature, threshold, score });
                }
            }
        }
        best
    }
}

/// Majority label; ties go to the lowest label index.
fn majority(counts: &[u64]) -> usize {
    let mut best = 0;
    for (label, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = label;
        }
    }
    best
}

/// Routes `x` to a leaf and returns (label, class-count proportions).
pub fn predict_tree<T: Real>(
    root: &TreeNode<T>,
    x: &[T],
) -> Result<(usize, Vec<T>), LearnerError> {
    let mut node = root;
    loop {
        match node {
            TreeNode::Split {
                feature_index,
                threshold,
                left,
                right,
            } => {
                if *feature_index >= x.len() {
                    return Err(LearnerError::DimensionMismatch {
                        expected: *feature_index + 1,
                        got: x.len(),
                    });
                }
                node = if x[*feature_index] <= *threshold {
                    left
                } else {
                    right
                };
            }
            TreeNode::Leaf {
                label_index,
                class_counts,
            } => {
                let total: u64 = class_counts.iter().sum();
                let inv = T::of(1.0 / total as f64);
                let dist = class_counts
                    .iter()
                    .map(|&c| T::of(c as f64) * inv)
                    .collect();
                return Ok((*label_index, dist));
            }
        }
    }
}
