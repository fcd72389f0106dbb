use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cv::{cross_validate, CvReport, DEFAULT_FOLDS};
use super::metrics::R2;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

/// Pipeline configurations to cross-validate with shared folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub configs: Vec<PipelineConfig>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SweepGrid {
    pub fn new(configs: Vec<PipelineConfig>) -> Self {
        SweepGrid {
            configs,
            folds: DEFAULT_FOLDS,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.configs.is_empty() {
            return Err(Error::config("configs", "grid is empty"));
        }
        if self.folds < 2 {
            return Err(Error::config("folds", "need at least 2 folds"));
        }
        for (i, c) in self.configs.iter().enumerate() {
            c.validate().map_err(|e| match e {
                Error::InvalidConfig { field, message } => Error::InvalidConfig {
                    field: format!("configs[{i}].{field}"),
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let grid: SweepGrid = serde_json::from_value(value).map_err(|e| Error::InvalidConfig {
            field: "grid".into(),
            message: e.to_string(),
        })?;
        grid.validate()?;
        Ok(grid)
    }
}

/// One ranked row of a sweep. Exactly one of `report` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rank: usize,
    /// Position of the config in the grid.
    pub index: usize,
    pub vectorizer: String,
    pub learner: String,
    pub r2: Option<R2>,
    pub cosine: Option<f64>,
    pub cosine_score: Option<f64>,
    pub config: PipelineConfig,
    pub report: Option<CvReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    pub folds: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

fn r2_key(r: Option<R2>) -> f64 {
    r.and_then(R2::value).unwrap_or(f64::NEG_INFINITY)
}

fn rank_order(a: &SweepRow, b: &SweepRow) -> Ordering {
    match (&a.report, &b.report) {
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
        (Some(ra), Some(rb)) => rb
            .mean
            .cosine_score
            .total_cmp(&ra.mean.cosine_score)
            .then_with(|| r2_key(b.r2).total_cmp(&r2_key(a.r2)))
            .then_with(|| a.index.cmp(&b.index)),
    }
}

/// Cross-validates every config of `grid` and ranks them by mean
/// cosine_score, then mean R², then grid position. A failing config becomes
/// a row with an error note, ranked last.
pub fn grid_sweep(dataset: &Dataset, grid: &SweepGrid) -> Result<SweepResults> {
    grid.validate()?;
    let mut rows: Vec<SweepRow> = grid
        .configs
        .par_iter()
        .enumerate()
        .map(|(index, config)| {
            let outcome = cross_validate(dataset, config, grid.folds, grid.seed);
            let (report, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow {
                rank: 0,
                index,
                vectorizer: config.vectorizer_label(),
                learner: config.learner_label().to_string(),
                r2: report.as_ref().map(|r| r.mean.r2),
                cosine: report.as_ref().map(|r| r.mean.cosine),
                cosine_score: report.as_ref().map(|r| r.mean.cosine_score),
                config: config.clone(),
                report,
                error,
            }
        })
        .collect();
    rows.sort_by(rank_order);
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(SweepResults {
        folds: grid.folds,
        seed: grid.seed,
        rows,
    })
}

impl SweepResults {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results serialize")
    }

    /// Fixed-width table with one line per row in rank order.
    pub fn to_table(&self) -> String {
        const HEAD: [&str; 4] = [
            "Vectorization Method",
            "Learning Model",
            "R^2 Score",
            "Cosine Similarity",
        ];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| match &r.error {
                None => [
                    r.vectorizer.clone(),
                    r.learner.clone(),
                    format!("{:.4}", r.r2.unwrap_or(R2::Degenerate)),
                    format!("{:.4}", r.cosine_score.unwrap_or(f64::NAN)),
                ],
                Some(e) => [
                    r.vectorizer.clone(),
                    r.learner.clone(),
                    "-".into(),
                    format!("- (error: {e})"),
                ],
            })
            .collect();
        let mut width = HEAD.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        // The last column is left unpadded so error notes do not widen it.
        width[3] = HEAD[3].len();
        let mut out = String::new();
        let line = |out: &mut String, row: [&str; 4]| {
            let _ = writeln!(
                out,
                "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}",
                row[0],
                row[1],
                row[2],
                row[3],
                w0 = width[0],
                w1 = width[1],
                w2 = width[2],
                w3 = width[3],
            );
        };
        line(&mut out, HEAD);
        let rule = width.iter().sum::<usize>() + 6;
        out.push_str(&"-".repeat(rule));
        out.push('\n');
        for row in &cells {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3]]);
        }
        out
    }
}
