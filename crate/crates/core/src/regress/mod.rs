//! Regressors behind one prediction contract: least squares, linear ε-SVR
//! and gradient-boosted regression trees.

mod gbm;
mod linalg;
mod ols;
mod svr;

pub use gbm::{fit_gbm, GbmConfig, GbmModel, TreeNode};
pub use linalg::cholesky_solve;
pub use ols::{fit_ols, DEFAULT_RIDGE};
pub use svr::{fit_svr, fit_svr_with_history, svr_objective, SvrConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectorize::{DenseVector, SparseVector};

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Sparse(Vec<SparseVector>),
    Dense(Vec<DenseVector>),
}

/// Feature rows of one shared dimension, optionally with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: Rows,
    dimension: usize,
    targets: Option<Vec<f64>>,
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Sparse(&'a SparseVector),
    Dense(&'a [f64]),
}

impl Row<'_> {
    pub fn dot(&self, w: &[f64]) -> f64 {
        match self {
            Row::Sparse(v) => v.dot_dense(w),
            Row::Dense(v) => v.iter().zip(w).map(|(a, b)| a * b).sum(),
        }
    }

    pub fn value(&self, feature: usize) -> f64 {
        match self {
            Row::Sparse(v) => v.get(feature),
            Row::Dense(v) => v[feature],
        }
    }

    /// Calls `f(feature, value)` for every non-zero entry in feature order.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Row::Sparse(v) => v.entries().iter().for_each(|&(j, x)| f(j, x)),
            Row::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .for_each(|(j, &x)| f(j, x)),
        }
    }
}

impl DesignMatrix {
    pub fn sparse(rows: Vec<SparseVector>, dimension: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: bad.dimension(),
            });
        }
        Ok(DesignMatrix {
            rows: Rows::Sparse(rows),
            dimension,
            targets: None,
        })
    }

    pub fn dense(rows: Vec<DenseVector>, dimension: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: bad.len(),
            });
        }
        Ok(DesignMatrix {
            rows: Rows::Dense(rows),
            dimension,
            targets: None,
        })
    }

    /// Dense matrix from literal rows; the dimension is taken from the first
    /// row (0 when empty).
    pub fn from_rows(rows: Vec<DenseVector>) -> Result<Self> {
        let dimension = rows.first().map_or(0, Vec::len);
        Self::dense(rows, dimension)
    }

    pub fn with_targets(mut self, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != self.len() {
            return Err(Error::validation(format!(
                "{} targets for {} rows",
                targets.len(),
                self.len()
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("targets must be finite"));
        }
        self.targets = Some(targets);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        match &self.rows {
            Rows::Sparse(r) => r.len(),
            Rows::Dense(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &Rows {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.rows {
            Rows::Sparse(r) => Row::Sparse(&r[i]),
            Rows::Dense(r) => Row::Dense(&r[i]),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Row<'_>> {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn targets(&self) -> Option<&[f64]> {
        self.targets.as_deref()
    }

    pub(crate) fn training_targets(&self) -> Result<&[f64]> {
        let y = self
            .targets()
            .ok_or_else(|| Error::validation("design matrix has no targets"))?;
        if y.is_empty() {
            return Err(Error::validation("cannot fit on zero rows"));
        }
        Ok(y)
    }

    /// Column means.
    pub(crate) fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dimension];
        for row in self.iter() {
            row.for_each_nonzero(|j, v| mean[j] += v);
        }
        let n = self.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// Common prediction contract for fitted regressors.
pub trait Predictor {
    fn dimension(&self) -> usize;

    fn predict_row(&self, row: Row<'_>) -> f64;

    /// Raw, unclipped predictions.
    fn predict(&self, x: &DesignMatrix) -> Result<Vec<f64>> {
        if x.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.dimension(),
            });
        }
        Ok(x.iter().map(|row| self.predict_row(row)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

impl Predictor for LinearModel {
    fn dimension(&self) -> usize {
        self.weights.len()
    }

    fn predict_row(&self, row: Row<'_>) -> f64 {
        row.dot(&self.weights) + self.bias
    }
}

/// Clamps every score to the task range [-1, 1].
pub fn clip_scores(scores: &[f64]) -> Vec<f64> {
    scores.iter().map(|s| s.clamp(-1.0, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_prediction() {
        let model = LinearModel {
            weights: vec![2.0],
            bias: 1.0,
        };
        let x = DesignMatrix::from_rows(vec![vec![3.0], vec![0.0]]).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![7.0, 1.0]);
        assert_eq!(model.predict(&x).unwrap(), model.predict(&x).unwrap());

        let wide = DesignMatrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            model.predict(&wide),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn zero_sparse_row_predicts_bias() {
        let model = LinearModel {
            weights: vec![0.3, -0.2, 0.9],
            bias: -0.4,
        };
        let x = DesignMatrix::sparse(vec![SparseVector::zeros(3)], 3).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![-0.4]);
    }

    #[test]
    fn clipping() {
        assert_eq!(clip_scores(&[1.3]), vec![1.0]);
        assert_eq!(clip_scores(&[-2.0, 0.2]), vec![-1.0, 0.2]);
        assert_eq!(clip_scores(&[0.0]), vec![0.0]);
    }

    #[test]
    fn matrix_validation() {
        assert!(DesignMatrix::dense(vec![vec![1.0], vec![1.0, 2.0]], 1).is_err());
        assert!(DesignMatrix::sparse(vec![SparseVector::zeros(2)], 3).is_err());
        let x = DesignMatrix::from_rows(vec![vec![1.0]]).unwrap();
        assert!(x.clone().with_targets(vec![1.0, 2.0]).is_err());
        assert!(x.with_targets(vec![f64::NAN]).is_err());
    }
}
