//! Unpaired two-sample t-test (pooled variance) for comparing per-fold
//! metric lists.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

pub fn unpaired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, EvalError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::TooFewSamples);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    let va = a.iter().map(|x| (x - ma) * (x - ma)).sum::<f64>() / (na - 1.0);
    let vb = b.iter().map(|x| (x - mb) * (x - mb)).sum::<f64>() / (nb - 1.0);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let t = if se > 0.0 { (ma - mb) / se } else { 0.0 };
    let p = if se > 0.0 {
        let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
        2.0 * (1.0 - dist.cdf(t.abs()))
    } else {
        1.0
    };
    Ok(TTest { t, df, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_groups_give_p_one() {
        let a = [0.9, 0.91, 0.89, 0.9, 0.9];
        let r = unpaired_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_computed_case() {
        // means 3 and 4, pooled variance 2.5, t = -1, df = 8:
        // two-sided p = 0.34659...
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let r = unpaired_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(r.t, -1.0, epsilon = 1e-12);
        assert_eq!(r.df, 8.0);
        assert_abs_diff_eq!(r.p, 0.3466, epsilon = 1e-3);
    }

    #[test]
    fn clearly_different_groups_are_significant() {
        let a = [0.95, 0.96, 0.94, 0.95, 0.97];
        let b = [0.70, 0.72, 0.69, 0.71, 0.70];
        let r = unpaired_t_test(&a, &b).unwrap();
        assert!(r.p < 1e-6);
        assert!(r.t > 0.0);
    }
}
