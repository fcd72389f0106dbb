//! Least squares with an optional ridge penalty on the weights.
//!
//! The bias is left unpenalized by centering: with `Xc = X - 1 x̄ᵀ` and
//! `yc = y - ȳ`, the minimizer of `‖y - Xw - b‖² + ridge ‖w‖²` is the ridge
//! solution of `(Xc, yc)` and `b = ȳ - x̄ᵀw`. The normal equations are solved
//! in the primal `(XcᵀXc + ridge I) w = Xcᵀ yc` when there are no more
//! features than rows, and in the dual `(Xc Xcᵀ + ridge I) a = yc`,
//! `w = Xcᵀ a` otherwise. Both give the same solution; the dual keeps wide
//! n-gram problems at `rows × rows`.

use super::linalg::cholesky_solve;
use super::{DesignMatrix, LinearModel};
use crate::error::{Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-8;

pub fn fit_ols(x: &DesignMatrix, ridge: f64) -> Result<LinearModel> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::config("ridge", "must be a finite value >= 0"));
    }
    let y = x.training_targets()?;
    let n = y.len();
    let d = x.dimension();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    if d == 0 {
        return Ok(LinearModel {
            weights: Vec::new(),
            bias: y_mean,
        });
    }
    let x_mean = x.column_means();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let weights = if d <= n {
        solve_primal(x, &x_mean, &yc, ridge)?
    } else {
        solve_dual(x, &x_mean, &yc, ridge)?
    };
    let bias = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    let model = LinearModel { weights, bias };
    if !model.is_finite() {
        return Err(Error::Singular);
    }
    Ok(model)
}

fn solve_primal(x: &DesignMatrix, x_mean: &[f64], yc: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let d = x.dimension();
    let n = x.len() as f64;
    let mut a = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut nz: Vec<(usize, f64)> = Vec::new();
    for (row, &t) in x.iter().zip(yc) {
        nz.clear();
        row.for_each_nonzero(|j, v| nz.push((j, v)));
        for &(j, vj) in &nz {
            rhs[j] += vj * t;
            for &(k, vk) in &nz {
                a[j * d + k] += vj * vk;
            }
        }
    }
    // XcᵀXc = XᵀX - n x̄ x̄ᵀ. yc sums to zero so Xcᵀyc = Xᵀyc.
    for j in 0..d {
        for k in 0..d {
            a[j * d + k] -= n * x_mean[j] * x_mean[k];
        }
        a[j * d + j] += ridge;
    }
    cholesky_solve(&mut a, d, &rhs)
}

fn solve_dual(x: &DesignMatrix, x_mean: &[f64], yc: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let d = x.dimension();
    let mean_sq: f64 = x_mean.iter().map(|m| m * m).sum();
    let mean_dot: Vec<f64> = x.iter().map(|r| r.dot(x_mean)).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let raw = match (x.row(i), x.row(j)) {
                (super::Row::Sparse(a), super::Row::Sparse(b)) => a.dot(b),
                (ri, rj) => {
                    let mut s = 0.0;
                    ri.for_each_nonzero(|f, v| s += v * rj.value(f));
                    s
                }
            };
            let c = raw - mean_dot[i] - mean_dot[j] + mean_sq;
            k[i * n + j] = c;
            k[j * n + i] = c;
        }
        k[i * n + i] += ridge;
    }
    let alpha = cholesky_solve(&mut k, n, yc)?;
    let mut w = vec![0.0; d];
    let mut alpha_sum = 0.0;
    for (row, &a) in x.iter().zip(&alpha) {
        row.for_each_nonzero(|j, v| w[j] += a * v);
        alpha_sum += a;
    }
    for (wj, m) in w.iter_mut().zip(x_mean) {
        *wj -= alpha_sum * m;
    }
    Ok(w)
}
