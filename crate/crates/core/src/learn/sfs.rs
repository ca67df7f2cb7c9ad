//! Sequential forward selection wrapped around the SVM, scored by
//! cross-validated AUC, with a >=4-of-5 fold consensus rule.

use serde::Serialize;

use super::smote::balance_with_smote;
use super::svm::{svm_score_batch, svm_train, SvmParams};
use super::LearnError;
use crate::eval::{roc_auc, stratified_folds};
use crate::table::FeatureTable;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfsConfig {
    /// Consensus fold count (one greedy run per fold).
    pub folds: usize,
    /// Inner CV folds behind each candidate-set evaluation.
    pub metric_folds: usize,
    /// A feature enters the consensus set when selected in at least this
    /// many of the fold runs.
    pub min_consensus: usize,
    /// Minimum AUC improvement to accept another feature.
    pub improvement_eps: f64,
    pub svm: SvmParams,
    /// SMOTE neighbor count applied to each training partition before
    /// fitting; None disables oversampling.
    pub smote_k: Option<usize>,
    pub seed: u64,
}

impl Default for SfsConfig {
    fn default() -> Self {
        SfsConfig {
            folds: 5,
            metric_folds: 5,
            min_consensus: 4,
            improvement_eps: 1e-6,
            svm: SvmParams::default(),
            smote_k: Some(5),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldSelection {
    /// Feature names in selection order.
    pub selected: Vec<String>,
    pub selected_idx: Vec<usize>,
    /// Incumbent AUC after each acceptance, starting at the 0.5 baseline;
    /// non-decreasing by construction.
    pub auc_trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub folds: Vec<FoldSelection>,
    pub min_consensus: usize,
    /// Features selected in at least `min_consensus` fold runs, ordered by
    /// mean selection step then column index.
    pub consensus: Vec<String>,
    pub consensus_idx: Vec<usize>,
}

/// Greedy forward search over feature indices. Starts from the empty set
/// at baseline 0.5; each step adds the candidate maximizing `metric`
/// (ties to the lowest column index) and stops when no candidate improves
/// the incumbent by more than `eps`.
pub fn greedy_sfs(
    n_features: usize,
    eps: f64,
    mut metric: impl FnMut(&[usize]) -> f64,
) -> (Vec<usize>, Vec<f64>) {
    let mut selected: Vec<usize> = Vec::new();
    let mut trace = vec![0.5];
    let mut incumbent = 0.5;
    loop {
        let mut best_idx = None;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..n_features {
            if selected.contains(&c) {
                continue;
            }
            let mut candidate = selected.clone();
            candidate.push(c);
            let score = metric(&candidate);
            if score > best_score {
                best_score = score;
                best_idx = Some(c);
            }
        }
        match best_idx {
            Some(c) if best_score > incumbent + eps => {
                selected.push(c);
                incumbent = best_score;
                trace.push(incumbent);
            }
            _ => break,
        }
    }
    (selected, trace)
}

/// Mean AUC of the SVM over a stratified `metric_folds`-fold CV of `table`
/// restricted to `columns`. Training partitions are SMOTE-balanced when
/// configured; degenerate folds (failed fits, tied scores) score 0.5.
fn cv_auc(
    table: &FeatureTable,
    columns: &[usize],
    folds: &[Vec<usize>],
    cfg: &SfsConfig,
    run: usize,
) -> f64 {
    let sub = table.select_features(columns);
    let mut total = 0.0;
    for (f, val_rows) in folds.iter().enumerate() {
        let val_set: std::collections::HashSet<usize> = val_rows.iter().cloned().collect();
        let train_rows: Vec<usize> =
            (0..sub.n_rows()).filter(|r| !val_set.contains(r)).collect();
        let mut train = sub.select_rows(&train_rows);
        if let Some(k) = cfg.smote_k {
            if let Ok(balanced) = balance_with_smote(
                &train,
                k,
                crate::seed::derive(cfg.seed, "sfs-smote", &[run as u64, f as u64]),
            ) {
                train = balanced;
            }
        }
        let auc = match svm_train(&train, &cfg.svm) {
            Ok(model) => {
                let val = sub.select_rows(val_rows);
                match svm_score_batch(&model, &val) {
                    Ok(scores) => match roc_auc(&scores, val.labels()) {
                        Ok(roc) => roc.auc,
                        Err(_) => 0.5,
                    },
                    Err(_) => 0.5,
                }
            }
            Err(_) => 0.5,
        };
        total += auc;
    }
    total / folds.len() as f64
}

/// Runs one greedy search per consensus fold (each on that fold's training
/// portion, scored by inner `metric_folds`-fold CV mean AUC) and reports
/// the features selected in at least `min_consensus` runs.
pub fn sfs_select(table: &FeatureTable, cfg: &SfsConfig) -> Result<SelectionResult, LearnError> {
    if table.n_features() < 2 {
        return Err(LearnError::TooFewFeatures(table.n_features()));
    }
    let outer = stratified_folds(
        table.labels(),
        cfg.folds,
        crate::seed::derive(cfg.seed, "sfs-outer", &[]),
    )?;
    let mut fold_selections = Vec::with_capacity(cfg.folds);
    for (run, held_out) in outer.iter().enumerate() {
        let held: std::collections::HashSet<usize> = held_out.iter().cloned().collect();
        let train_rows: Vec<usize> =
            (0..table.n_rows()).filter(|r| !held.contains(r)).collect();
        let train = table.select_rows(&train_rows);
        let inner = stratified_folds(
            train.labels(),
            cfg.metric_folds,
            crate::seed::derive(cfg.seed, "sfs-inner", &[run as u64]),
        )?;
        let (selected_idx, auc_trace) = greedy_sfs(table.n_features(), cfg.improvement_eps, |cols| {
            cv_auc(&train, cols, &inner, cfg, run)
        });
        fold_selections.push(FoldSelection {
            selected: selected_idx
                .iter()
                .map(|&c| table.feature_names()[c].clone())
                .collect(),
            selected_idx,
            auc_trace,
        });
    }

    // Consensus: appears in >= min_consensus runs; order by mean selection
    // step, ties by column index.
    let mut stats: Vec<(usize, usize, f64)> = Vec::new(); // (col, count, mean step)
    for c in 0..table.n_features() {
        let mut count = 0;
        let mut step_sum = 0.0;
        for sel in &fold_selections {
            if let Some(pos) = sel.selected_idx.iter().position(|&s| s == c) {
                count += 1;
                step_sum += pos as f64;
            }
        }
        if count >= cfg.min_consensus {
            stats.push((c, count, step_sum / count as f64));
        }
    }
    stats.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    let consensus_idx: Vec<usize> = stats.iter().map(|&(c, _, _)| c).collect();
    let consensus = consensus_idx
        .iter()
        .map(|&c| table.feature_names()[c].clone())
        .collect();
    Ok(SelectionResult {
        folds: fold_selections,
        min_consensus: cfg.min_consensus,
        consensus,
        consensus_idx,
    })
}
