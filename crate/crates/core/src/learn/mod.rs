//! Classifiers and feature machinery: RBF-SVM trained by sequential
//! minimal optimization, SFS wrapper selection under cross-validated AUC,
//! SMOTE oversampling, and the variance-filter / ReliefF baselines.

mod relieff;
mod sfs;
mod smote;
mod svm;
mod variance;

pub use relieff::{relieff_rank, top_positive_weights};
pub use sfs::{greedy_sfs, sfs_select, FoldSelection, SelectionResult, SfsConfig};
pub use smote::{balance_with_smote, smote, smote_augment_table, SmoteParams};
pub use svm::{
    load_svm_model, save_svm_model, svm_score, svm_score_batch, svm_train, GammaSpec,
    SvmDiagnostics, SvmModel, SvmParams,
};
pub use variance::variance_filter;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("non-finite feature value at row {row} column {column:?}")]
    NonFinite { row: usize, column: String },
    #[error("table has no rows")]
    EmptyTable,
    #[error("table has no feature columns")]
    NoFeatures,
    #[error("need at least {want} rows per class, smallest class has {got}")]
    TooFewRowsPerClass { want: usize, got: usize },
    #[error("SMO did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("feature dimension mismatch: model has {model}, input has {input}")]
    DimMismatch { model: usize, input: usize },
    #[error("SFS needs at least 2 features, got {0}")]
    TooFewFeatures(usize),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
    #[error("{path}: {reason}")]
    BadModelFile { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
