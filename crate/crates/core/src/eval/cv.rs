use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, EvalReport, ScoredPair, R2};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{FittedPipeline, PipelineConfig};

pub const DEFAULT_FOLDS: usize = 5;

/// Shuffles `0..n` with `seed` and deals it into `k` folds whose sizes
/// differ by at most one. Indices within a fold are sorted.
pub fn k_fold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::config("folds", "need at least 2 folds"));
    }
    if k > n {
        return Err(Error::config(
            "folds",
            format!("{k} folds requested for {n} records"),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<EvalReport>,
    /// Macro average over folds. R² averages only non-degenerate folds.
    pub mean: EvalReport,
}

fn mean_report(folds: &[EvalReport]) -> EvalReport {
    let k = folds.len() as f64;
    let r2s: Vec<f64> = folds.iter().filter_map(|f| f.r2.value()).collect();
    let r2 = if r2s.is_empty() {
        R2::Degenerate
    } else {
        R2::Value(r2s.iter().sum::<f64>() / r2s.len() as f64)
    };
    let avg = |f: fn(&EvalReport) -> f64| folds.iter().map(f).sum::<f64>() / k;
    EvalReport {
        r2,
        cosine: avg(|r| r.cosine),
        cosine_weight: avg(|r| r.cosine_weight),
        cosine_score: avg(|r| r.cosine_score),
        n: folds.iter().map(|f| f.n).sum(),
    }
}

/// k-fold cross-validation of `config` on `dataset`.
pub fn cross_validate(
    dataset: &Dataset,
    config: &PipelineConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    cross_validate_observed(dataset, config, k, seed, &|_, _| {})
}

/// Like [`cross_validate`], calling `observer(fold, &pipeline)` with each
/// pipeline fitted on the training portion of `fold`.
pub fn cross_validate_observed(
    dataset: &Dataset,
    config: &PipelineConfig,
    k: usize,
    seed: u64,
    observer: &(dyn Fn(usize, &FittedPipeline) + Sync),
) -> Result<CvReport> {
    config.validate()?;
    let unscored = dataset.unscored_ids();
    if !unscored.is_empty() {
        return Err(Error::validation(format!(
            "records without sentiment: {}",
            unscored.join(", ")
        )));
    }
    let folds = k_fold_split(dataset.len(), k, seed)?;
    let reports = folds
        .par_iter()
        .enumerate()
        .map(|(f, held_out)| {
            let mut is_held = vec![false; dataset.len()];
            held_out.iter().for_each(|&i| is_held[i] = true);
            let train: Vec<usize> = (0..dataset.len()).filter(|&i| !is_held[i]).collect();

            let train_set = dataset.subset(&train);
            let test_set = dataset.subset(held_out);
            let pipeline = FittedPipeline::fit(config, &train_set)?;
            observer(f, &pipeline);

            let pred = pipeline.predict(&test_set)?;
            let gold: Vec<f64> = test_set.iter().filter_map(|r| r.sentiment).collect();
            evaluate(&ScoredPair::new(gold, pred, held_out.len())?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport {
        k,
        seed,
        mean: mean_report(&reports),
        folds: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        let folds = k_fold_split(6, 3, 7).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());

        let sizes: Vec<usize> = k_fold_split(5, 2, 0)
            .unwrap()
            .iter()
            .map(Vec::len)
            .collect();
        assert_eq!(sizes, [3, 2]);

        assert_eq!(
            k_fold_split(10, 4, 3).unwrap(),
            k_fold_split(10, 4, 3).unwrap()
        );
        assert_ne!(
            k_fold_split(40, 4, 3).unwrap(),
            k_fold_split(40, 4, 4).unwrap()
        );
    }

    #[test]
    fn split_rejects_bad_k() {
        assert!(k_fold_split(5, 1, 0).is_err());
        assert!(k_fold_split(5, 6, 0).is_err());
        assert!(k_fold_split(5, 5, 0).is_ok());
    }

    #[test]
    fn mean_skips_degenerate_r2() {
        let fold = |r2, c| EvalReport {
            r2,
            cosine: c,
            cosine_weight: 1.0,
            cosine_score: c,
            n: 2,
        };
        let m = mean_report(&[fold(R2::Value(0.5), 0.2), fold(R2::Degenerate, 0.4)]);
        assert_eq!(m.r2, R2::Value(0.5));
        assert!((m.cosine - 0.3).abs() < 1e-15);
        assert_eq!(m.n, 4);
        let m = mean_report(&[fold(R2::Degenerate, 1.0)]);
        assert_eq!(m.r2, R2::Degenerate);
    }
}
