//! Intensity statistics over masked voxels.

use super::RadiomicsError;
use crate::ingest::Volume;

/// The 9 intensity features in [`super::INTENSITY_NAMES`] order:
/// minimum, maximum, mean, standard deviation, sum, median, skewness,
/// kurtosis, variance.
///
/// Variance and standard deviation use the sample (N-1) convention;
/// skewness is `m3 / m2^1.5` and kurtosis the excess `m4 / m2^2 - 3` with
/// population central moments. Zero-spread inputs report 0 for standard
/// deviation, variance, skewness and kurtosis.
pub fn intensity_features(v: &Volume) -> Result<[f64; 9], RadiomicsError> {
    let mut vals = v.masked_values();
    if vals.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    let n = vals.len() as f64;
    let sum: f64 = vals.iter().sum();
    let mean = sum / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in &vals {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sum_sq_dev = m2;
    m2 /= n;
    m3 /= n;
    m4 /= n;

    vals.sort_by(f64::total_cmp);
    let minimum = vals[0];
    let maximum = *vals.last().unwrap();
    let median = if vals.len() % 2 == 1 {
        vals[vals.len() / 2]
    } else {
        0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
    };
    let variance = if vals.len() > 1 {
        sum_sq_dev / (n - 1.0)
    } else {
        0.0
    };
    let std = variance.sqrt();
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    Ok([
        minimum, maximum, mean, std, sum, median, skewness, kurtosis, variance,
    ])
}
