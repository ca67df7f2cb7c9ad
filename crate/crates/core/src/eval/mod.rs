//! Metrics and experiment machinery: ROC/AUC, confusion metrics,
//! ISO-accuracy analysis, stratified cross-validation and a two-sample
//! t-test helper.

mod cv;
mod metrics;
mod roc;
mod ttest;

pub use cv::{run_cv, stratified_folds, CvConfig, FoldMetrics, FoldScorer, MeanStd, MetricsReport};
pub use metrics::{confusion_metrics, iso_accuracy_threshold, ConfusionMetrics, IsoAccuracy};
pub use roc::{roc_auc, RocCurve};
pub use ttest::{unpaired_t_test, TTest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels must be nonempty and equal length")]
    LengthMismatch,
    #[error("both classes must be present")]
    SingleClass,
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("class {class} has {got} rows, fewer than {want} folds")]
    ClassSmallerThanFolds { class: u8, got: usize, want: usize },
    #[error("fold {fold} failed: {reason}")]
    FoldFailed { fold: usize, reason: String },
    #[error("t-test needs at least 2 values per group")]
    TooFewSamples,
}
