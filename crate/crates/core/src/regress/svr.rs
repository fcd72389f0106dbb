//! Linear ε-insensitive support vector regression in the primal:
//!
//! ```text
//! minimize  ½‖w‖² + C Σ max(0, |yᵢ − w·xᵢ − b| − ε)
//! ```
//!
//! by stochastic subgradient descent. Epoch `t` uses step `rate / (1 + t)`
//! and visits the rows in a freshly shuffled order; the regularizer is spread
//! evenly over the rows of an epoch.
//!
//! Subgradient steps do not decrease the objective monotonically, so the
//! solver averages the iterates within each epoch and keeps the epoch average
//! with the lowest objective seen so far; that is the returned model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DesignMatrix, LinearModel, Predictor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvrConfig {
    pub c: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub rate: f64,
    pub seed: u64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            c: 1.0,
            epsilon: 0.1,
            epochs: 200,
            rate: 0.3,
            seed: 0,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::config("c", "must be positive"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config("epsilon", "must be >= 0"));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::config("rate", "must be positive"));
        }
        Ok(())
    }
}

/// Primal objective of `model` on `x`.
pub fn svr_objective(model: &LinearModel, x: &DesignMatrix, c: f64, epsilon: f64) -> Result<f64> {
    let y = x.training_targets()?;
    let preds = model.predict(x)?;
    let hinge: f64 = preds
        .iter()
        .zip(y)
        .map(|(p, t)| ((t - p).abs() - epsilon).max(0.0))
        .sum();
    let norm_sq: f64 = model.weights.iter().map(|w| w * w).sum();
    Ok(0.5 * norm_sq + c * hinge)
}

pub fn fit_svr(x: &DesignMatrix, config: &SvrConfig) -> Result<LinearModel> {
    fit_svr_with_history(x, config).map(|(model, _)| model)
}

/// Like [`fit_svr`], also returning, per epoch, the objective of the best
/// epoch-averaged iterate so far.
pub fn fit_svr_with_history(
    x: &DesignMatrix,
    config: &SvrConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    config.validate()?;
    let y = x.training_targets()?;
    let n = y.len();
    let d = x.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Starting at the target mean makes (0, ȳ) a fixed point whenever every
    // target already lies inside the tube.
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut w = vec![0.0; d];
    let mut b = y_mean;
    let mut avg = LinearModel {
        weights: vec![0.0; d],
        bias: b,
    };
    let mut best = avg.clone();
    let mut best_objective = f64::INFINITY;
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let eta = config.rate / (1.0 + epoch as f64);
        let shrink = 1.0 - eta / n as f64;
        order.shuffle(&mut rng);
        avg.weights.copy_from_slice(&w);
        avg.bias = b;
        for (k, &i) in order.iter().enumerate() {
            let row = x.row(i);
            let residual = y[i] - row.dot(&w) - b;
            if shrink != 1.0 {
                w.iter_mut().for_each(|wj| *wj *= shrink);
            }
            if residual.abs() > config.epsilon {
                let step = eta * config.c * residual.signum();
                row.for_each_nonzero(|j, v| w[j] += step * v);
                b += step;
            }
            // Running mean; exact when the iterate does not move.
            let inv = 1.0 / (k + 1) as f64;
            for (a, &wj) in avg.weights.iter_mut().zip(&w) {
                *a += (wj - *a) * inv;
            }
            avg.bias += (b - avg.bias) * inv;
        }
        let objective = svr_objective(&avg, x, config.c, config.epsilon)?;
        if objective <= best_objective {
            best_objective = objective;
            best.clone_from(&avg);
        }
        history.push(best_objective);
    }
    Ok((best, history))
}
