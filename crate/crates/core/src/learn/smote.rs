//! SMOTE: synthetic minority oversampling along nearest-neighbor segments.

use rand::Rng;

use super::LearnError;
use crate::table::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SmoteParams {
    pub k: usize,
}

impl Default for SmoteParams {
    fn default() -> Self {
        SmoteParams { k: 5 }
    }
}

pub(crate) fn synth_point(x: &[f64], nn: &[f64], u: f64) -> Vec<f64> {
    x.iter().zip(nn).map(|(&a, &b)| a + u * (b - a)).collect()
}

/// Generates `n_synthetic` rows, each `x + u * (nn - x)` with `u ~ U[0,1]`,
/// `x` a random minority row and `nn` one of its `k` nearest minority
/// neighbors (Euclidean). `k` is clamped to `count - 1` with a warning when
/// the minority is too small; a single-row minority yields copies.
pub fn smote(
    rows: &[Vec<f64>],
    k: usize,
    n_synthetic: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, LearnError> {
    if rows.is_empty() {
        return Err(LearnError::EmptyTable);
    }
    let n = rows.len();
    let k_eff = if k >= n {
        log::warn!("smote: k={k} >= minority count {n}, clamping to {}", n - 1);
        n - 1
    } else {
        k
    };

    // k nearest minority neighbors per row (ties by lower index).
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2: f64 = rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d2, j)
                })
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dists.truncate(k_eff);
            dists.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    let mut rng = crate::seed::rng(seed, "smote", &[]);
    let mut out = Vec::with_capacity(n_synthetic);
    for _ in 0..n_synthetic {
        let i = rng.gen_range(0..n);
        if neighbors[i].is_empty() {
            out.push(rows[i].clone());
            continue;
        }
        let nn = neighbors[i][rng.gen_range(0..neighbors[i].len())];
        let u: f64 = rng.gen_range(0.0..=1.0);
        out.push(synth_point(&rows[i], &rows[nn], u));
    }
    Ok(out)
}

/// Appends enough synthetic minority rows to `table` to balance the two
/// classes. No-op when already balanced.
pub fn balance_with_smote(
    table: &FeatureTable,
    k: usize,
    seed: u64,
) -> Result<FeatureTable, LearnError> {
    let n_pos = table.labels().iter().filter(|&&l| l == 1).count();
    let n_neg = table.n_rows() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let (minority_label, deficit) = if n_pos < n_neg {
        (1u8, n_neg - n_pos)
    } else {
        (0u8, n_pos - n_neg)
    };
    if deficit == 0 {
        return Ok(table.clone());
    }
    smote_augment_table(table, minority_label, k, deficit, seed)
}

/// Appends `n_synthetic` SMOTE rows of the given class to a copy of the
/// table.
pub fn smote_augment_table(
    table: &FeatureTable,
    minority_label: u8,
    k: usize,
    n_synthetic: usize,
    seed: u64,
) -> Result<FeatureTable, LearnError> {
    let rows: Vec<Vec<f64>> = (0..table.n_rows())
        .filter(|&r| table.labels()[r] == minority_label)
        .map(|r| table.row(r).to_vec())
        .collect();
    if rows.is_empty() {
        return Err(LearnError::SingleClass);
    }
    let synthetics = smote(&rows, k, n_synthetic, seed)?;
    let mut out = table.clone();
    for (i, row) in synthetics.into_iter().enumerate() {
        out.push_synthetic(&format!("smote_{i}"), minority_label, row)
            .expect("synthetic row matches table");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_example() {
        assert_eq!(synth_point(&[0.0, 0.0], &[1.0, 1.0], 0.5), vec![0.5, 0.5]);
    }

    #[test]
    fn synthetics_lie_on_segments() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.77).sin(), (i as f64 * 1.31).cos(), i as f64 * 0.1])
            .collect();
        let synths = smote(&rows, 5, 500, 99).unwrap();
        for s in &synths {
            // Segment membership: some (seed, neighbor) pair contains s.
            let mut best = f64::INFINITY;
            for a in &rows {
                for b in &rows {
                    let denom: f64 = b
                        .iter()
                        .zip(a)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>();
                    let u = if denom > 0.0 {
                        s.iter()
                            .zip(a.iter().zip(b))
                            .map(|(sv, (av, bv))| (sv - av) * (bv - av))
                            .sum::<f64>()
                            / denom
                    } else {
                        0.0
                    };
                    let u = u.clamp(0.0, 1.0);
                    let resid: f64 = s
                        .iter()
                        .zip(a.iter().zip(b))
                        .map(|(sv, (av, bv))| {
                            let p = av + u * (bv - av);
                            (sv - p) * (sv - p)
                        })
                        .sum::<f64>()
                        .sqrt();
                    best = best.min(resid);
                }
            }
            assert!(best < 1e-9, "synthetic {s:?} off every segment by {best}");
        }
    }

    #[test]
    fn identical_minority_yields_identical_synthetics() {
        let rows = vec![vec![2.0, -1.0]; 6];
        let synths = smote(&rows, 5, 40, 1).unwrap();
        assert!(synths.iter().all(|s| s == &rows[0]));
    }

    #[test]
    fn clamps_k_and_handles_singleton() {
        let rows = vec![vec![1.0], vec![2.0]];
        let synths = smote(&rows, 5, 10, 3).unwrap();
        for s in &synths {
            assert!((1.0..=2.0).contains(&s[0]));
        }
        let one = vec![vec![4.0]];
        let synths = smote(&one, 5, 3, 3).unwrap();
        assert_eq!(synths, vec![vec![4.0]; 3]);
    }

    #[test]
    fn balances_table_classes() {
        let mut t = FeatureTable::new(vec!["a".to_string()]);
        for i in 0..8 {
            t.push_row(&format!("n{i}"), 0, &[i as f64]).unwrap();
        }
        for i in 0..3 {
            t.push_row(&format!("p{i}"), 1, &[10.0 + i as f64]).unwrap();
        }
        let balanced = balance_with_smote(&t, 5, 7).unwrap();
        let pos = balanced.labels().iter().filter(|&&l| l == 1).count();
        let neg = balanced.n_rows() - pos;
        assert_eq!(pos, neg);
    }
}
