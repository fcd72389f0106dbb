//! Task metrics, k-fold cross-validation and grid sweeps.

mod cv;
mod metrics;
mod sweep;

pub use cv::{cross_validate, cross_validate_observed, k_fold_split, CvReport, DEFAULT_FOLDS};
pub use metrics::{
    cosine, cosine_score, evaluate, r_squared, EvalReport, ScoredPair, DEGENERATE_MARKER, R2,
};
pub use sweep::{grid_sweep, SweepGrid, SweepResults, SweepRow};
