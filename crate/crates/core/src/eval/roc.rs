//! ROC curves with exact Mann-Whitney AUC (ties count 0.5 per pair).

use serde::Serialize;

use super::EvalError;

/// A threshold sweep over the distinct scores. `points[j]` is the
/// `(FPr, TPr)` reached by predicting positive iff `score > thresholds[j]`;
/// the sweep starts at (0, 0) and ends at (1, 1) with threshold -inf.
/// `counts[j]` holds the raw `(fp, tp)` pair behind each point.
#[derive(Debug, Clone, Serialize)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    pub counts: Vec<(u64, u64)>,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Builds the ROC curve and its AUC. The AUC is accumulated from tie-group
/// counts, so it equals the Mann-Whitney U statistic divided by
/// `n_pos * n_neg` exactly.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve, EvalError> {
    if scores.is_empty() || scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch);
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(i));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut thresholds = Vec::new();
    let mut points = vec![(0.0, 0.0)];
    let mut counts = vec![(0u64, 0u64)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut u_half = 0.0f64; // accumulates U in units of whole pairs

    let mut i = 0;
    while i < order.len() {
        let v = scores[order[i]];
        let mut tp_g = 0u64;
        let mut fp_g = 0u64;
        while i < order.len() && scores[order[i]] == v {
            if labels[order[i]] == 1 {
                tp_g += 1;
            } else {
                fp_g += 1;
            }
            i += 1;
        }
        // Each negative in the group is beaten by every earlier positive
        // and ties the group's positives at half credit.
        u_half += fp_g as f64 * (tp as f64 + 0.5 * tp_g as f64);
        tp += tp_g;
        fp += fp_g;
        thresholds.push(v);
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        counts.push((fp, tp));
    }
    // Align thresholds with points: point 0 is "> max score" (none
    // positive), point j is "> j-th distinct score", the last is "> -inf"
    // (all positive).
    thresholds.push(f64::NEG_INFINITY);
    let auc = u_half / (n_pos as f64 * n_neg as f64);
    Ok(RocCurve {
        thresholds,
        points,
        counts,
        auc,
        n_pos,
        n_neg,
    })
}

impl RocCurve {
    /// Trapezoidal integral of the stored points (equals `auc` up to
    /// floating-point reassociation).
    pub fn trapezoid(&self) -> f64 {
        let mut area = 0.0;
        for w in self.points.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            area += (x1 - x0) * (y0 + y1) * 0.5;
        }
        area
    }

    /// CSV export `threshold,fpr,tpr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for (t, (fpr, tpr)) in self.thresholds.iter().zip(&self.points) {
            out.push_str(&format!("{t:.16e},{fpr:.16e},{tpr:.16e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_separation_gives_one() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let labels = [1, 1, 0, 0];
        let roc = roc_auc(&scores, &labels).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert_eq!(*roc.points.first().unwrap(), (0.0, 0.0));
        assert_eq!(*roc.points.last().unwrap(), (1.0, 1.0));
    }

    #[test]
    fn three_of_four_pairs() {
        // pos {0.9, 0.2}, neg {0.5, 0.1}: 3 of 4 pairs rank correctly.
        let scores = [0.9, 0.2, 0.5, 0.1];
        let labels = [1, 1, 0, 0];
        let roc = roc_auc(&scores, &labels).unwrap();
        assert_eq!(roc.auc, 0.75);
    }

    #[test]
    fn ties_count_half() {
        let scores = [0.5, 0.5];
        let labels = [1, 0];
        let roc = roc_auc(&scores, &labels).unwrap();
        assert_eq!(roc.auc, 0.5);
    }

    #[test]
    fn auc_equals_pair_counting_oracle() {
        let mut state = 88172645463325252u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let n = 2 + (next() % 40) as usize;
            let scores: Vec<f64> = (0..n).map(|_| ((next() % 7) as f64) * 0.25).collect();
            let labels: Vec<u8> = (0..n).map(|_| (next() % 2) as u8).collect();
            if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
                continue;
            }
            let roc = roc_auc(&scores, &labels).unwrap();
            let mut u = 0.0;
            let mut pairs = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] == 1 && labels[j] == 0 {
                        pairs += 1.0;
                        u += if scores[i] > scores[j] {
                            1.0
                        } else if scores[i] == scores[j] {
                            0.5
                        } else {
                            0.0
                        };
                    }
                }
            }
            assert_eq!(roc.auc, u / pairs);
        }
    }

    #[test]
    fn monotone_transform_preserves_auc_and_label_swap_flips_it() {
        let scores = [0.3, -0.2, 1.4, 0.9, 0.0, -1.0, 0.5];
        let labels = [1, 0, 1, 0, 1, 0, 1];
        let roc = roc_auc(&scores, &labels).unwrap();
        let transformed: Vec<f64> = scores.iter().map(|s| (s * 2.0).exp()).collect();
        let roc2 = roc_auc(&transformed, &labels).unwrap();
        assert_eq!(roc.auc, roc2.auc);
        let swapped: Vec<u8> = labels.iter().map(|&l| 1 - l).collect();
        let roc3 = roc_auc(&scores, &swapped).unwrap();
        assert_abs_diff_eq!(roc3.auc, 1.0 - roc.auc, epsilon = 1e-15);
    }

    #[test]
    fn trapezoid_matches_stored_auc() {
        let scores = [0.1, 0.4, 0.35, 0.8, 0.8, 0.2];
        let labels = [0, 1, 0, 1, 0, 1];
        let roc = roc_auc(&scores, &labels).unwrap();
        assert_abs_diff_eq!(roc.auc, roc.trapezoid(), epsilon = 1e-12);
    }

    #[test]
    fn thresholds_reproduce_points() {
        let scores = [0.1, 0.4, 0.35, 0.8, 0.8, 0.2, 0.4];
        let labels = [0, 1, 0, 1, 0, 1, 1];
        let roc = roc_auc(&scores, &labels).unwrap();
        for (j, &t) in roc.thresholds.iter().enumerate() {
            let tp = scores
                .iter()
                .zip(&labels)
                .filter(|(&s, &l)| l == 1 && s > t)
                .count() as u64;
            let fp = scores
                .iter()
                .zip(&labels)
                .filter(|(&s, &l)| l == 0 && s > t)
                .count() as u64;
            assert_eq!((fp, tp), roc.counts[j], "threshold {t}");
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            roc_auc(&[0.5], &[1]),
            Err(EvalError::SingleClass)
        ));
        assert!(matches!(
            roc_auc(&[f64::NAN, 0.2], &[1, 0]),
            Err(EvalError::NonFiniteScore(0))
        ));
        assert!(matches!(roc_auc(&[], &[]), Err(EvalError::LengthMismatch)));
    }
}
