use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type DenseVector = Vec<f64>;

/// Sorted `(index, value)` pairs without explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SparseRepr", into = "SparseRepr")]
pub struct SparseVector {
    dimension: usize,
    entries: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    dimension: usize,
    entries: Vec<(usize, f64)>,
}

impl TryFrom<SparseRepr> for SparseVector {
    type Error = Error;

    fn try_from(r: SparseRepr) -> Result<Self> {
        SparseVector::new(r.dimension, r.entries)
    }
}

impl From<SparseVector> for SparseRepr {
    fn from(v: SparseVector) -> Self {
        SparseRepr {
            dimension: v.dimension,
            entries: v.entries,
        }
    }
}

impl SparseVector {
    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            dimension,
            entries: Vec::new(),
        }
    }

    /// Checked constructor: indices strictly increasing and below `dimension`.
    /// Zero values are dropped.
    pub fn new(dimension: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for pair in entries.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(Error::validation(
                    "sparse indices must be strictly increasing",
                ));
            }
        }
        if let Some(&(last, _)) = entries.last() {
            if last >= dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: last + 1,
                });
            }
        }
        Ok(SparseVector {
            dimension,
            entries: entries.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        })
    }

    /// Sums values of repeated indices. Panics if an index is out of range.
    pub fn from_unsorted(dimension: usize, mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!(
                i < dimension,
                "index {i} out of range for dimension {dimension}"
            );
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        SparseVector {
            dimension,
            entries: merged,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        let mut acc = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut dense = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            dense[i] = v;
        }
        dense
    }
}
