//! Softmax over two logits and the batch-averaged cross-entropy loss.

use super::network::Scalar;

/// Max-shifted two-class softmax; outputs sum to 1 and never overflow.
pub fn softmax<T: Scalar>(y0: T, y1: T) -> (T, T) {
    let m = y0.max(y1);
    let e0 = (y0 - m).exp();
    let e1 = (y1 - m).exp();
    let s = e0 + e1;
    (e0 / s, e1 / s)
}

pub(crate) fn log_probs<T: Scalar>(y0: T, y1: T) -> (T, T) {
    let m = y0.max(y1);
    let lse = m + ((y0 - m).exp() + (y1 - m).exp()).ln();
    (y0 - lse, y1 - lse)
}

/// Mean cross-entropy over a batch: `(1/N) sum -(q log p1 + (1-q) log p0)`
/// with natural logs.
pub fn batch_loss<T: Scalar>(logits: &[(T, T)], labels: &[u8]) -> T {
    assert_eq!(logits.len(), labels.len());
    assert!(!logits.is_empty());
    let mut total = T::zero();
    for (&(y0, y1), &q) in logits.iter().zip(labels) {
        let (lp0, lp1) = log_probs(y0, y1);
        total = total - if q == 1 { lp1 } else { lp0 };
    }
    total / T::from_f64(logits.len() as f64).unwrap()
}

/// Gradient of [`batch_loss`] with respect to each logit pair:
/// `(softmax - onehot) / N`.
pub fn batch_loss_grad<T: Scalar>(logits: &[(T, T)], labels: &[u8]) -> Vec<(T, T)> {
    let n = T::from_f64(logits.len() as f64).unwrap();
    logits
        .iter()
        .zip(labels)
        .map(|(&(y0, y1), &q)| {
            let (p0, p1) = softmax(y0, y1);
            let (t0, t1) = if q == 1 {
                (T::zero(), T::one())
            } else {
                (T::one(), T::zero())
            };
            ((p0 - t0) / n, (p1 - t1) / n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_logits_give_half() {
        let (p0, p1) = softmax(0.0f64, 0.0);
        assert_eq!((p0, p1), (0.5, 0.5));
    }

    #[test]
    fn closed_form_quarter() {
        let (p0, p1) = softmax(0.0f64, 3.0f64.ln());
        assert_abs_diff_eq!(p0, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p1, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn extreme_logits_do_not_overflow() {
        let (p0, p1) = softmax(1000.0f64, 0.0);
        assert!(p0.is_finite() && p1.is_finite());
        assert_abs_diff_eq!(p0, 1.0, epsilon = 1e-12);
        assert!(p1 >= 0.0);
    }

    #[test]
    fn shift_invariance_and_unit_sum() {
        for i in 0..50 {
            let y0 = (i as f64) * 0.37 - 7.0;
            let y1 = (i as f64) * -0.61 + 3.0;
            let c = (i as f64) * 1.3 - 20.0;
            let (a0, a1) = softmax(y0, y1);
            let (b0, b1) = softmax(y0 + c, y1 + c);
            assert_abs_diff_eq!(a0 + a1, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a0, b0, epsilon = 1e-12);
            assert_abs_diff_eq!(a1, b1, epsilon = 1e-12);
        }
    }

    #[test]
    fn confident_predictions_drive_loss_to_zero() {
        let logits = vec![(20.0f64, -20.0), (-20.0, 20.0)];
        let labels = vec![0, 1];
        assert!(batch_loss(&logits, &labels) < 1e-12);
    }

    #[test]
    fn single_sample_closed_form() {
        // q = 1, p1 = 0.75 -> loss = -ln 0.75.
        let logits = vec![(0.0f64, 3.0f64.ln())];
        let loss = batch_loss(&logits, &[1]);
        assert_abs_diff_eq!(loss, -(0.75f64.ln()), epsilon = 1e-12);
        assert_abs_diff_eq!(loss, 0.287682, epsilon = 1e-6);
    }

    #[test]
    fn matches_per_sample_oracle_mean() {
        let mut logits = Vec::new();
        let mut labels = Vec::new();
        for i in 0..37 {
            logits.push(((i as f64 * 0.71).sin() * 4.0, (i as f64 * 1.13).cos() * 3.0));
            labels.push(u8::from(i % 3 == 0));
        }
        let got: f64 = batch_loss(&logits, &labels);
        let mut want = 0.0;
        for (&(y0, y1), &q) in logits.iter().zip(&labels) {
            let p1 = y1.exp() / (y0.exp() + y1.exp());
            let p0 = 1.0 - p1;
            want += -(f64::from(q) * p1.ln() + (1.0 - f64::from(q)) * p0.ln());
        }
        want /= logits.len() as f64;
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn flipping_a_label_raises_loss() {
        let logits = vec![(5.0f64, -5.0), (-5.0, 5.0), (4.0, -4.0)];
        let correct = vec![0, 1, 0];
        let flipped = vec![0, 1, 1];
        assert!(batch_loss(&logits, &correct) < batch_loss(&logits, &flipped));
    }
}
