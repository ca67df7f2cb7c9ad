//! Stratified k-fold cross-validation with per-fold and aggregate metrics.

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{confusion_metrics, iso_accuracy_threshold};
use super::roc::roc_auc;
use super::EvalError;

/// Seeded stratified fold assignment: per-class shuffle, then contiguous
/// chunks with remainders spread from opposite ends so fold sizes differ by
/// at most one per class. Every fold holds both classes.
pub fn stratified_folds(
    labels: &[u8],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let mut folds = vec![Vec::new(); k];
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(EvalError::ClassSmallerThanFolds {
                class,
                got: idx.len(),
                want: k,
            });
        }
        use rand::seq::SliceRandom;
        let mut rng = crate::seed::rng(seed, "stratified-folds", &[u64::from(class)]);
        idx.shuffle(&mut rng);
        let base = idx.len() / k;
        let rem = idx.len() % k;
        let mut off = 0;
        for f in 0..k {
            // Class-0 remainders fill from fold 0 up, class-1 from the top
            // down, to keep total fold sizes within one of each other.
            let extra = if class == 0 { f < rem } else { f >= k - rem };
            let take = base + usize::from(extra);
            folds[f].extend(&idx[off..off + take]);
            off += take;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample (N-1) standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn from_values(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub auc: f64,
    /// Metrics at the sign threshold (score > 0).
    pub acc: f64,
    pub sen: f64,
    pub spe: f64,
    /// Metrics at the ISO-accuracy tangent threshold.
    pub iso_threshold: f64,
    pub acc_iso: f64,
    pub sen_iso: f64,
    pub spe_iso: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateMetrics {
    pub auc: MeanStd,
    pub acc: MeanStd,
    pub sen: MeanStd,
    pub spe: MeanStd,
    pub acc_iso: MeanStd,
    pub sen_iso: MeanStd,
    pub spe_iso: MeanStd,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub folds: Vec<FoldMetrics>,
    pub aggregate: AggregateMetrics,
}

impl MetricsReport {
    fn from_folds(folds: Vec<FoldMetrics>) -> MetricsReport {
        let pick = |f: fn(&FoldMetrics) -> f64| {
            MeanStd::from_values(&folds.iter().map(f).collect::<Vec<_>>())
        };
        let aggregate = AggregateMetrics {
            auc: pick(|m| m.auc),
            acc: pick(|m| m.acc),
            sen: pick(|m| m.sen),
            spe: pick(|m| m.spe),
            acc_iso: pick(|m| m.acc_iso),
            sen_iso: pick(|m| m.sen_iso),
            spe_iso: pick(|m| m.spe_iso),
        };
        MetricsReport { folds, aggregate }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 5, seed: 0 }
    }
}

/// One pipeline's per-fold evaluation: given train/test row indices,
/// return one decision score per test row (sign = predicted label).
pub trait FoldScorer {
    fn score_fold(
        &self,
        fold: usize,
        train: &[usize],
        test: &[usize],
    ) -> Result<Vec<f64>, String>;
}

/// Runs stratified k-fold cross-validation: folds are fixed by
/// `(labels, folds, seed)` alone, so different pipelines under the same
/// config see identical partitions. Folds run in parallel; any fold
/// failure aborts the run naming the fold.
pub fn run_cv(
    labels: &[u8],
    cfg: &CvConfig,
    scorer: &(impl FoldScorer + Sync),
) -> Result<MetricsReport, EvalError> {
    let folds = stratified_folds(labels, cfg.folds, cfg.seed)?;
    let all: Vec<usize> = (0..labels.len()).collect();
    let results: Result<Vec<FoldMetrics>, EvalError> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let test_set: std::collections::HashSet<usize> = test.iter().cloned().collect();
            let train: Vec<usize> = all
                .iter()
                .cloned()
                .filter(|i| !test_set.contains(i))
                .collect();
            let scores = scorer
                .score_fold(f, &train, test)
                .map_err(|reason| EvalError::FoldFailed { fold: f, reason })?;
            if scores.len() != test.len() {
                return Err(EvalError::FoldFailed {
                    fold: f,
                    reason: format!(
                        "scorer returned {} scores for {} test rows",
                        scores.len(),
                        test.len()
                    ),
                });
            }
            let test_labels: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
            let roc = roc_auc(&scores, &test_labels).map_err(|e| EvalError::FoldFailed {
                fold: f,
                reason: e.to_string(),
            })?;
            let sign = confusion_metrics(&scores, &test_labels, 0.0);
            let iso = iso_accuracy_threshold(&roc, roc.n_pos, roc.n_neg);
            let at_iso = confusion_metrics(&scores, &test_labels, iso.threshold);
            Ok(FoldMetrics {
                fold: f,
                test_indices: test.clone(),
                auc: roc.auc,
                acc: sign.acc,
                sen: sign.sen,
                spe: sign.spe,
                iso_threshold: iso.threshold,
                acc_iso: at_iso.acc,
                sen_iso: at_iso.sen,
                spe_iso: at_iso.spe,
            })
        })
        .collect();
    Ok(MetricsReport::from_folds(results?))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct OracleScorer {
        labels: Vec<u8>,
    }

    impl FoldScorer for OracleScorer {
        fn score_fold(
            &self,
            _fold: usize,
            _train: &[usize],
            test: &[usize],
        ) -> Result<Vec<f64>, String> {
            Ok(test
                .iter()
                .map(|&i| if self.labels[i] == 1 { 1.0 } else { -1.0 })
                .collect())
        }
    }

    fn labels_250() -> Vec<u8> {
        (0..250).map(|i| u8::from(i % 5 < 2)).collect() // 100 pos, 150 neg
    }

    #[test]
    fn fold_sizes_and_ratios() {
        let labels = labels_250();
        let folds = stratified_folds(&labels, 5, 7).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 50);
            let pos = f.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!(pos, 20); // exact global ratio
        }
        // Partition: disjoint and complete.
        let mut all: Vec<usize> = folds.iter().flatten().cloned().collect();
        all.sort_unstable();
        assert_eq!(all, (0..250).collect::<Vec<_>>());
    }

    #[test]
    fn uneven_sizes_stay_within_one() {
        let labels: Vec<u8> = (0..253).map(|i| u8::from(i % 3 == 0)).collect();
        let folds = stratified_folds(&labels, 5, 1).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        let min = *sizes.iter().min().unwrap();
        let max = *sizes.iter().max().unwrap();
        assert!(max - min <= 1, "sizes {sizes:?}");
    }

    #[test]
    fn same_seed_same_report() {
        let labels = labels_250();
        let scorer = OracleScorer {
            labels: labels.clone(),
        };
        let cfg = CvConfig { folds: 5, seed: 3 };
        let a = run_cv(&labels, &cfg, &scorer).unwrap();
        let b = run_cv(&labels, &cfg, &scorer).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.aggregate.auc.mean, 1.0);
        assert_eq!(a.aggregate.acc.mean, 1.0);
    }

    #[test]
    fn aggregate_recomputable_from_folds() {
        let labels = labels_250();
        let scorer = OracleScorer {
            labels: labels.clone(),
        };
        let report = run_cv(&labels, &CvConfig { folds: 5, seed: 9 }, &scorer).unwrap();
        let aucs: Vec<f64> = report.folds.iter().map(|f| f.auc).collect();
        let again = MeanStd::from_values(&aucs);
        assert_eq!(report.aggregate.auc, again);
    }

    #[test]
    fn class_smaller_than_folds_is_rejected() {
        let labels = vec![0, 0, 0, 0, 0, 1, 1];
        assert!(matches!(
            stratified_folds(&labels, 5, 0),
            Err(EvalError::ClassSmallerThanFolds { class: 1, got: 2, want: 5 })
        ));
    }
}
