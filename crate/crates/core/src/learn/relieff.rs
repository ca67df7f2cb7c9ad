//! ReliefF feature weighting for the two-class case.

use rand::Rng;

use super::LearnError;
use crate::table::FeatureTable;

/// Standard two-class ReliefF over `m` seeded sample draws (with
/// replacement) and `k` nearest hits/misses by Euclidean distance on
/// features min-max scaled to [0, 1]:
/// `W[f] += (sum_miss |diff| - sum_hit |diff|) / (m * k)`.
/// `k` is clamped to `min_class_count - 1`.
pub fn relieff_rank(
    table: &FeatureTable,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<f64>, LearnError> {
    let n = table.n_rows();
    let d = table.n_features();
    if d == 0 {
        return Err(LearnError::NoFeatures);
    }
    let labels = table.labels();
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let min_class = n_pos.min(n_neg);
    if min_class < 2 {
        return Err(LearnError::TooFewRowsPerClass {
            want: 2,
            got: min_class,
        });
    }
    let k_eff = k.min(min_class - 1).max(1);

    // Min-max scale to [0, 1]; constant columns scale to zero everywhere.
    let mut scaled = vec![0.0f64; n * d];
    for c in 0..d {
        let col = table.column(c);
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        for r in 0..n {
            scaled[r * d + c] = if range > 0.0 { (col[r] - lo) / range } else { 0.0 };
        }
    }
    let row = |r: usize| &scaled[r * d..(r + 1) * d];

    let mut rng = crate::seed::rng(seed, "relieff", &[]);
    let mut w = vec![0.0f64; d];
    let denom = (m * k_eff) as f64;
    for _ in 0..m {
        let r = rng.gen_range(0..n);
        let rv = row(r);
        // Nearest hits (same class, excluding r) and misses, ties by index.
        let mut hits: Vec<(f64, usize)> = Vec::new();
        let mut misses: Vec<(f64, usize)> = Vec::new();
        for t in 0..n {
            if t == r {
                continue;
            }
            let d2: f64 = rv
                .iter()
                .zip(row(t))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if labels[t] == labels[r] {
                hits.push((d2, t));
            } else {
                misses.push((d2, t));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        misses.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, h) in hits.iter().take(k_eff) {
            let hv = row(h);
            for f in 0..d {
                w[f] -= (rv[f] - hv[f]).abs() / denom;
            }
        }
        for &(_, ms) in misses.iter().take(k_eff) {
            let mv = row(ms);
            for f in 0..d {
                w[f] += (rv[f] - mv[f]).abs() / denom;
            }
        }
    }
    Ok(w)
}

/// Feature indices with strictly positive ReliefF weight, ordered by
/// descending weight (ties by index). Falls back to the single
/// highest-weight feature when no weight is positive.
pub fn top_positive_weights(weights: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    if idx.is_empty() {
        let best = (0..weights.len())
            .max_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a)))
            .expect("nonempty weights");
        return vec![best];
    }
    idx.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_row_table() -> FeatureTable {
        // Feature 0 separates classes perfectly; feature 1 is constant.
        let mut t = FeatureTable::new(vec!["sep".to_string(), "const".to_string()]);
        t.push_row("a", 0, &[0.0, 7.0]).unwrap();
        t.push_row("b", 0, &[0.0, 7.0]).unwrap();
        t.push_row("c", 1, &[1.0, 7.0]).unwrap();
        t.push_row("d", 1, &[1.0, 7.0]).unwrap();
        t
    }

    #[test]
    fn separating_feature_outweighs_constant() {
        // Hand-run with k=1: every hit diff is 0, every miss diff is 1 on
        // the separating feature, so its weight is +1; the constant feature
        // stays at exactly 0.
        let w = relieff_rank(&four_row_table(), 1, 20, 5).unwrap();
        assert!(w[0] > 0.0);
        assert_eq!(w[1], 0.0);
        assert!((w[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_feature_gets_equal_weight() {
        let mut t = FeatureTable::new(vec!["x".to_string(), "x_copy".to_string()]);
        for i in 0..10 {
            let v = i as f64;
            t.push_row(&format!("r{i}"), u8::from(i >= 5), &[v, v]).unwrap();
        }
        let w = relieff_rank(&t, 3, 50, 11).unwrap();
        assert!((w[0] - w[1]).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_weights() {
        let t = four_row_table();
        let a = relieff_rank(&t, 1, 30, 42).unwrap();
        let b = relieff_rank(&t, 1, 30, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clamps_k_for_small_classes() {
        let w = relieff_rank(&four_row_table(), 99, 10, 1).unwrap();
        assert!(w[0] > 0.0);
    }

    #[test]
    fn top_positive_selection() {
        assert_eq!(top_positive_weights(&[0.5, -0.1, 0.7, 0.0]), vec![2, 0]);
        assert_eq!(top_positive_weights(&[-0.5, -0.1]), vec![1]);
    }
}
