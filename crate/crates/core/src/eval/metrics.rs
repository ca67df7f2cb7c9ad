//! Confusion metrics and the ISO-accuracy tangent threshold.

use serde::Serialize;

use super::roc::RocCurve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfusionMetrics {
    pub acc: f64,
    pub sen: f64,
    pub spe: f64,
}

/// Predict positive iff `score > threshold`; SEN = TP/(TP+FN),
/// SPE = TN/(TN+FP), ACC = (TP+TN)/N.
pub fn confusion_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> ConfusionMetrics {
    let (mut tp, mut tn, mut fp, mut fnn) = (0u64, 0u64, 0u64, 0u64);
    for (&s, &l) in scores.iter().zip(labels) {
        let pred = s > threshold;
        match (pred, l == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fnn += 1,
            (false, false) => tn += 1,
        }
    }
    let n = (tp + tn + fp + fnn) as f64;
    let pos = (tp + fnn) as f64;
    let neg = (tn + fp) as f64;
    ConfusionMetrics {
        acc: if n > 0.0 { (tp + tn) as f64 / n } else { 0.0 },
        sen: if pos > 0.0 { tp as f64 / pos } else { 0.0 },
        spe: if neg > 0.0 { tn as f64 / neg } else { 0.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoAccuracy {
    /// Operating threshold (predict positive iff score > threshold).
    pub threshold: f64,
    /// Slope of the ISO-accuracy line family, `n_neg / n_pos`.
    pub slope: f64,
    /// Intercept of the tangent line, `TPr - slope * FPr` at the point.
    pub intercept: f64,
    /// The tangent ROC point `(FPr, TPr)`.
    pub point: (f64, f64),
    /// Accuracy attained at the tangent point.
    pub accuracy: f64,
}

/// The ROC point maximizing `TPr - slope * FPr` with slope `n_neg/n_pos`:
/// the tangent point of the ISO-accuracy line family, which attains the
/// maximum accuracy over all thresholds. Selection uses exact integer
/// arithmetic; ties resolve to the lowest-FPr point.
pub fn iso_accuracy_threshold(roc: &RocCurve, n_pos: usize, n_neg: usize) -> IsoAccuracy {
    // tpr - slope*fpr maximization, scaled by n_pos_roc * n_neg_roc * n_pos
    // (positive), becomes an integer objective.
    let mut best_j = 0usize;
    let mut best_obj = i128::MIN;
    for (j, &(fp, tp)) in roc.counts.iter().enumerate() {
        let obj = i128::from(tp) * roc.n_neg as i128 * n_pos as i128
            - i128::from(fp) * roc.n_pos as i128 * n_neg as i128;
        if obj > best_obj {
            best_obj = obj;
            best_j = j;
        }
    }
    let slope = n_neg as f64 / n_pos as f64;
    let (fpr, tpr) = roc.points[best_j];
    let (fp, tp) = roc.counts[best_j];
    let accuracy =
        (tp + roc.n_neg as u64 - fp) as f64 / (roc.n_pos + roc.n_neg) as f64;
    IsoAccuracy {
        threshold: roc.thresholds[best_j],
        slope,
        intercept: tpr - slope * fpr,
        point: (fpr, tpr),
        accuracy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::roc::roc_auc;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_correct_is_ones() {
        let m = confusion_metrics(&[0.9, 0.8, -0.5, -0.9], &[1, 1, 0, 0], 0.0);
        assert_eq!((m.acc, m.sen, m.spe), (1.0, 1.0, 1.0));
    }

    #[test]
    fn all_predicted_positive_degenerates() {
        let m = confusion_metrics(&[0.9, 0.8, 0.5], &[1, 0, 0], -10.0);
        assert_eq!(m.sen, 1.0);
        assert_eq!(m.spe, 0.0);
    }

    #[test]
    fn hand_built_confusion_table() {
        // threshold 0.5 (strictly greater): predictions for the 10 scores
        // below are [1,1,1,0,0,0,1,0,0,0]; labels give TP=2 FP=2 FN=2 TN=4.
        let scores = [0.9, 0.8, 0.7, 0.4, 0.3, 0.2, 0.6, 0.5, 0.1, 0.0];
        let labels = [1, 0, 1, 1, 0, 0, 0, 1, 0, 0];
        let m = confusion_metrics(&scores, &labels, 0.5);
        assert_abs_diff_eq!(m.acc, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sen, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.spe, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn cohort_slope() {
        // 431 malignant / 795 benign -> slope 795/431.
        let scores = [1.0, 0.0];
        let labels = [1, 0];
        let roc = roc_auc(&scores, &labels).unwrap();
        let iso = iso_accuracy_threshold(&roc, 431, 795);
        assert_abs_diff_eq!(iso.slope, 795.0 / 431.0, epsilon = 1e-15);
    }

    #[test]
    fn balanced_case_is_youden_point() {
        let scores = [0.9, 0.7, 0.65, 0.5, 0.45, 0.3, 0.2, 0.1];
        let labels = [1, 1, 0, 1, 0, 1, 0, 0];
        let roc = roc_auc(&scores, &labels).unwrap();
        let iso = iso_accuracy_threshold(&roc, 4, 4);
        // Exhaustive Youden maximization over the points.
        let youden = roc
            .points
            .iter()
            .map(|&(f, t)| t - f)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(iso.point.1 - iso.point.0, youden, epsilon = 1e-12);
    }

    #[test]
    fn tangent_threshold_attains_sweep_max_accuracy() {
        let scores = [0.9, 0.1, 0.4, 0.35, 0.8, 0.8, 0.2, 0.6, 0.55, 0.3];
        let labels = [1, 0, 1, 0, 1, 0, 0, 1, 0, 1];
        let n_pos = labels.iter().filter(|&&l| l == 1).count();
        let n_neg = labels.len() - n_pos;
        let roc = roc_auc(&scores, &labels).unwrap();
        let iso = iso_accuracy_threshold(&roc, n_pos, n_neg);
        let got = confusion_metrics(&scores, &labels, iso.threshold).acc;
        let sweep_max = roc
            .thresholds
            .iter()
            .map(|&t| confusion_metrics(&scores, &labels, t).acc)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(got, sweep_max);
        assert_eq!(got, iso.accuracy);
    }
}
