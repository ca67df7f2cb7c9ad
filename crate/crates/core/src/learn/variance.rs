//! Variance filter: drop features with below-average variance.

use super::LearnError;
use crate::table::FeatureTable;

/// Indices of columns whose sample variance is >= the mean of all column
/// variances (inclusive, so uniform-variance tables keep every column).
pub fn variance_filter(table: &FeatureTable) -> Result<Vec<usize>, LearnError> {
    if table.n_features() == 0 {
        return Err(LearnError::NoFeatures);
    }
    if table.n_rows() == 0 {
        return Err(LearnError::EmptyTable);
    }
    let n = table.n_rows() as f64;
    let variances: Vec<f64> = (0..table.n_features())
        .map(|c| {
            let col = table.column(c);
            let mean = col.iter().sum::<f64>() / n;
            if table.n_rows() < 2 {
                0.0
            } else {
                col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
            }
        })
        .collect();
    let mean_var = variances.iter().sum::<f64>() / variances.len() as f64;
    Ok((0..variances.len())
        .filter(|&c| variances[c] >= mean_var)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: &[&[f64]]) -> FeatureTable {
        let names = (0..cols.len()).map(|i| format!("f{i}")).collect();
        let mut t = FeatureTable::new(names);
        for r in 0..cols[0].len() {
            let row: Vec<f64> = cols.iter().map(|c| c[r]).collect();
            t.push_row(&format!("r{r}"), (r % 2) as u8, &row).unwrap();
        }
        t
    }

    #[test]
    fn keeps_only_above_mean_variance() {
        // Column variances 1 and 9 (mean 5): keep only the second.
        let t = table(&[&[0.0, 2.0, 0.0, 2.0, 1.0], &[0.0, 6.0, 0.0, 6.0, 3.0]]);
        let vars: Vec<f64> = (0..2)
            .map(|c| {
                let col = t.column(c);
                let m = col.iter().sum::<f64>() / 5.0;
                col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 4.0
            })
            .collect();
        assert_eq!(vars, vec![1.0, 9.0]);
        assert_eq!(variance_filter(&t).unwrap(), vec![1]);
    }

    #[test]
    fn equal_variance_keeps_everything() {
        let t = table(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[0.0, 1.0, 2.0]]);
        assert_eq!(variance_filter(&t).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn constant_column_is_dropped() {
        let t = table(&[&[5.0, 5.0, 5.0, 5.0], &[1.0, 2.0, 3.0, 4.0]]);
        assert_eq!(variance_filter(&t).unwrap(), vec![1]);
    }
}
