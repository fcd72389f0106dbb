//! Gradient-boosted regression trees for squared error.
//!
//! Every round fits one depth-limited tree to the current residuals. Splits
//! are found by exact greedy search over all distinct feature values (zeros
//! of sparse rows included) maximizing
//!
//! ```text
//! gain = G_L²/(n_L + λ) + G_R²/(n_R + λ) − G²/(n + λ)
//! ```
//!
//! where `G` is a residual sum and `n` a row count, and leaves predict
//! `G / (n + λ)`. The ensemble predicts `base + α Σ tree(x)`.

use serde::{Deserialize, Serialize};

use super::{DesignMatrix, Predictor, Row};
use crate::error::{Error, Result};

// Splits gaining less than this are not worth a node.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GbmConfig {
    pub rounds: usize,
    /// Shrinkage applied to every tree.
    pub alpha: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GbmConfig {
    fn default() -> Self {
        GbmConfig {
            rounds: 100,
            alpha: 0.3,
            lambda: 1.0,
            max_depth: 3,
            min_samples_leaf: 1,
        }
    }
}

impl GbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("alpha", "must lie in (0, 1]"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("lambda", "must be a finite value >= 0"));
        }
        if self.max_depth < 1 {
            return Err(Error::config("max_depth", "must be at least 1"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::config("min_samples_leaf", "must be at least 1"));
        }
        Ok(())
    }
}

/// Tree nodes are stored in a flat arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum TreeNode {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbmModel {
    pub base_score: f64,
    pub alpha: f64,
    pub dimension: usize,
    pub trees: Vec<Vec<TreeNode>>,
}

fn eval_tree(tree: &[TreeNode], row: Row<'_>) -> f64 {
    let mut node = 0;
    loop {
        match tree[node] {
            TreeNode::Leaf { value } => return value,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                node = if row.value(feature) < threshold {
                    left
                } else {
                    right
                }
            }
        }
    }
}

impl GbmModel {
    /// Prediction using only the first `rounds` trees.
    pub fn predict_row_truncated(&self, row: Row<'_>, rounds: usize) -> f64 {
        let sum: f64 = self.trees[..rounds.min(self.trees.len())]
            .iter()
            .map(|t| eval_tree(t, row))
            .sum();
        self.base_score + self.alpha * sum
    }

    pub fn leaf_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.trees.iter().flatten().filter_map(|n| match n {
            TreeNode::Leaf { value } => Some(*value),
            TreeNode::Split { .. } => None,
        })
    }

    pub(crate) fn check(&self) -> Result<()> {
        for tree in &self.trees {
            if tree.is_empty() {
                return Err(Error::Format("empty tree".into()));
            }
            for node in tree {
                match *node {
                    TreeNode::Leaf { value } if !value.is_finite() => {
                        return Err(Error::Format("non-finite leaf value".into()))
                    }
                    TreeNode::Split {
                        feature,
                        left,
                        right,
                        ..
                    } if feature >= self.dimension || left >= tree.len() || right >= tree.len() => {
                        return Err(Error::Format("tree node out of range".into()))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

impl Predictor for GbmModel {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn predict_row(&self, row: Row<'_>) -> f64 {
        self.predict_row_truncated(row, self.trees.len())
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Distinct feature value with the row count and residual sum at that value.
#[derive(Clone, Copy)]
struct Group {
    value: f64,
    count: usize,
    grad: f64,
}

struct TreeBuilder<'a> {
    x: &'a DesignMatrix,
    config: &'a GbmConfig,
    residual: &'a [f64],
    nodes: Vec<TreeNode>,
    // Per-feature scratch: (value, residual) of non-zero entries in the node.
    buckets: Vec<Vec<(f64, f64)>>,
}

impl TreeBuilder<'_> {
    fn score(&self, grad: f64, count: usize) -> f64 {
        grad * grad / (count as f64 + self.config.lambda)
    }

    fn best_split(&mut self, rows: &[usize], total_grad: f64) -> Option<Split> {
        let n = rows.len();
        let min_leaf = self.config.min_samples_leaf;
        if n < 2 * min_leaf {
            return None;
        }
        let mut touched: Vec<usize> = Vec::new();
        for &i in rows {
            let g = self.residual[i];
            let buckets = &mut self.buckets;
            self.x.row(i).for_each_nonzero(|j, v| {
                if buckets[j].is_empty() {
                    touched.push(j);
                }
                buckets[j].push((v, g));
            });
        }
        touched.sort_unstable();

        let parent = self.score(total_grad, n);
        let mut best: Option<Split> = None;
        let mut groups: Vec<Group> = Vec::new();
        for &j in &touched {
            let mut entries = std::mem::take(&mut self.buckets[j]);
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            let zero_count = n - entries.len();
            let zero_grad = total_grad - entries.iter().map(|e| e.1).sum::<f64>();

            groups.clear();
            let mut zero_pending = zero_count > 0;
            for &(v, g) in &entries {
                if zero_pending && v > 0.0 {
                    groups.push(Group {
                        value: 0.0,
                        count: zero_count,
                        grad: zero_grad,
                    });
                    zero_pending = false;
                }
                match groups.last_mut() {
                    Some(last) if last.value == v => {
                        last.count += 1;
                        last.grad += g;
                    }
                    _ => groups.push(Group {
                        value: v,
                        count: 1,
                        grad: g,
                    }),
                }
            }
            if zero_pending {
                groups.push(Group {
                    value: 0.0,
                    count: zero_count,
                    grad: zero_grad,
                });
            }

            let (mut left_n, mut left_g) = (0usize, 0.0);
            for pair in groups.windows(2) {
                left_n += pair[0].count;
                left_g += pair[0].grad;
                let right_n = n - left_n;
                if left_n < min_leaf || right_n < min_leaf {
                    continue;
                }
                let gain =
                    self.score(left_g, left_n) + self.score(total_grad - left_g, right_n) - parent;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let (lo, hi) = (pair[0].value, pair[1].value);
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some(Split {
                        feature: j,
                        threshold: if mid > lo { mid } else { hi },
                        gain,
                    });
                }
            }
            entries.clear();
            self.buckets[j] = entries;
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let total_grad: f64 = rows.iter().map(|&i| self.residual[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            value: total_grad / (rows.len() as f64 + self.config.lambda),
        });
        if depth >= self.config.max_depth {
            return id;
        }
        let Some(split) = self.best_split(&rows, total_grad) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x.row(i).value(split.feature) < split.threshold);
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

pub fn fit_gbm(x: &DesignMatrix, config: &GbmConfig) -> Result<GbmModel> {
    config.validate()?;
    let y = x.training_targets()?;
    let n = y.len();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut residual = vec![0.0; n];
    let mut buckets = vec![Vec::new(); x.dimension()];
    let mut trees = Vec::with_capacity(config.rounds);

    for _ in 0..config.rounds {
        for i in 0..n {
            residual[i] = y[i] - pred[i];
        }
        let mut builder = TreeBuilder {
            x,
            config,
            residual: &residual,
            nodes: Vec::new(),
            buckets: std::mem::take(&mut buckets),
        };
        builder.build((0..n).collect(), 0);
        let TreeBuilder {
            nodes, buckets: b, ..
        } = builder;
        buckets = b;
        for (i, p) in pred.iter_mut().enumerate() {
            *p += config.alpha * eval_tree(&nodes, x.row(i));
        }
        trees.push(nodes);
    }

    Ok(GbmModel {
        base_score,
        alpha: config.alpha,
        dimension: x.dimension(),
        trees,
    })
}
