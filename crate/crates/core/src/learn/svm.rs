//! Soft-margin binary SVM with RBF kernel, solved by sequential minimal
//! optimization (maximal-violating-pair working set selection).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::table::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", untagged)]
pub enum GammaSpec {
    /// `1 / (d * median pairwise squared distance)` over standardized
    /// training rows; falls back to `1/d` for degenerate geometry.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: GammaSpec,
    /// KKT violation tolerance for the SMO stop rule.
    pub tol: f64,
    pub max_iter: usize,
    /// z-score features by training statistics before kerneling.
    pub standardize: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: GammaSpec::Auto,
            tol: 1e-3,
            max_iter: 10_000_000,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmDiagnostics {
    /// Final maximal KKT violation (m - M).
    pub kkt_violation: f64,
    /// Minimization-form dual objective `1/2 a'Qa - sum(a)`.
    pub dual_objective: f64,
    /// `sum alpha_i y_i`, preserved at 0 by the pair updates.
    pub sum_alpha_y: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmModel {
    pub c: f64,
    pub gamma: f64,
    pub feature_names: Vec<String>,
    /// Per-feature standardization applied before the kernel.
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Support vectors in standardized space.
    pub support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub alpha_y: Vec<f64>,
    pub bias: f64,
    pub diagnostics: SvmDiagnostics,
    /// Training-row duals (all rows, including non-support), for
    /// invariant checks.
    pub alpha: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

/// Trains on the table's rows; labels 0 map to -1, labels 1 to +1.
pub fn svm_train(table: &FeatureTable, params: &SvmParams) -> Result<SvmModel, LearnError> {
    if table.n_rows() == 0 {
        return Err(LearnError::EmptyTable);
    }
    if table.n_features() == 0 {
        return Err(LearnError::NoFeatures);
    }
    table.check_finite().map_err(|e| match e {
        crate::table::TableError::NonFinite { row, column } => {
            LearnError::NonFinite { row, column }
        }
        other => LearnError::BadModelFile {
            path: String::new(),
            reason: other.to_string(),
        },
    })?;
    let n = table.n_rows();
    let d = table.n_features();
    let y: Vec<f64> = table
        .labels()
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(LearnError::SingleClass);
    }

    // Standardization (population std; constant columns keep std 1).
    let (means, stds) = if params.standardize {
        let mut means = vec![0.0; d];
        for r in 0..n {
            for (c, m) in means.iter_mut().enumerate() {
                *m += table.value(r, c);
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut vars = vec![0.0; d];
        for r in 0..n {
            for c in 0..d {
                let dv = table.value(r, c) - means[c];
                vars[c] += dv * dv;
            }
        }
        let stds: Vec<f64> = vars
            .iter()
            .map(|&v| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        (means, stds)
    } else {
        (vec![0.0; d], vec![1.0; d])
    };
    let x: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            (0..d)
                .map(|c| (table.value(r, c) - means[c]) / stds[c])
                .collect()
        })
        .collect();

    let gamma = match params.gamma {
        GammaSpec::Value(g) => g,
        GammaSpec::Auto => {
            let mut d2s = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    let mut d2 = 0.0;
                    for c in 0..d {
                        let dv = x[i][c] - x[j][c];
                        d2 += dv * dv;
                    }
                    d2s.push(d2);
                }
            }
            d2s.sort_by(f64::total_cmp);
            let median = if d2s.is_empty() {
                0.0
            } else {
                d2s[d2s.len() / 2]
            };
            if median > 1e-12 {
                1.0 / (d as f64 * median)
            } else {
                1.0 / d as f64
            }
        }
    };

    // Full kernel matrix; training sets at this scale stay small.
    let mut k = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rbf(&x[i], &x[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    let smo = solve_smo(&k, &y, params.c, params.tol, params.max_iter)?;

    let mut support = Vec::new();
    let mut alpha_y = Vec::new();
    for i in 0..n {
        if smo.alpha[i] > 0.0 {
            support.push(x[i].clone());
            alpha_y.push(smo.alpha[i] * y[i]);
        }
    }
    let sum_alpha_y: f64 = smo.alpha.iter().zip(&y).map(|(a, yy)| a * yy).sum();

    Ok(SvmModel {
        c: params.c,
        gamma,
        feature_names: table.feature_names().to_vec(),
        means,
        stds,
        support,
        alpha_y,
        bias: smo.bias,
        diagnostics: SvmDiagnostics {
            kkt_violation: smo.violation,
            dual_objective: smo.objective,
            sum_alpha_y,
            iterations: smo.iterations,
        },
        alpha: smo.alpha,
    })
}

struct SmoSolution {
    alpha: Vec<f64>,
    bias: f64,
    violation: f64,
    objective: f64,
    iterations: usize,
}

/// Maximal-violating-pair SMO on the dual
/// `min 1/2 a'Qa - sum(a)  s.t.  y'a = 0, 0 <= a <= C`.
fn solve_smo(
    k: &[f64],
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SmoSolution, LearnError> {
    let n = y.len();
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n]; // grad_i = (Q a)_i - 1
    let mut iterations = 0;
    let mut violation;
    loop {
        // i maximizes -y g over I_up, j minimizes -y g over I_low.
        let mut m_val = f64::NEG_INFINITY;
        let mut m_idx = usize::MAX;
        let mut mm_val = f64::INFINITY;
        let mut mm_idx = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            if in_up && v > m_val {
                m_val = v;
                m_idx = t;
            }
            if in_low && v < mm_val {
                mm_val = v;
                mm_idx = t;
            }
        }
        violation = m_val - mm_val;
        if violation <= tol || m_idx == usize::MAX || mm_idx == usize::MAX {
            break;
        }
        if iterations >= max_iter {
            return Err(LearnError::NoConvergence(max_iter));
        }
        iterations += 1;

        let (i, j) = (m_idx, mm_idx);
        let s = y[i] * y[j];
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let (low, high) = if s < 0.0 {
            ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
        } else {
            ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
        };
        let eta = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(1e-12);
        // E_i = y_i * grad_i.
        let e_diff = y[i] * grad[i] - y[j] * grad[j];
        let mut aj = aj_old + y[j] * e_diff / eta;
        aj = aj.clamp(low, high);
        let ai = ai_old + s * (aj_old - aj);
        let (dai, daj) = (ai - ai_old, aj - aj_old);
        if dai.abs() < 1e-15 && daj.abs() < 1e-15 {
            // Numerically stuck pair; accept the current (near-optimal) point.
            break;
        }
        alpha[i] = ai;
        alpha[j] = aj;
        for t in 0..n {
            grad[t] += y[t] * (dai * y[i] * k[t * n + i] + daj * y[j] * k[t * n + j]);
        }
    }

    // Bias from free support vectors, else the midpoint of the bound gap.
    let free: Vec<usize> = (0..n)
        .filter(|&t| alpha[t] > 1e-8 * c && alpha[t] < c * (1.0 - 1e-8))
        .collect();
    let bias = if free.is_empty() {
        let mut m_val = f64::NEG_INFINITY;
        let mut mm_val = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            if in_up {
                m_val = m_val.max(v);
            }
            if in_low {
                mm_val = mm_val.min(v);
            }
        }
        (m_val + mm_val) / 2.0
    } else {
        free.iter().map(|&t| -y[t] * grad[t]).sum::<f64>() / free.len() as f64
    };

    let sum_ag: f64 = (0..n).map(|t| alpha[t] * grad[t]).sum();
    let sum_a: f64 = alpha.iter().sum();
    let objective = 0.5 * (sum_ag + sum_a) - sum_a;

    Ok(SmoSolution {
        alpha,
        bias,
        violation,
        objective,
        iterations,
    })
}

/// Decision value `sum alpha_i y_i K(sv_i, x) + b`; predicted label is its
/// sign (positive -> malignant).
pub fn svm_score(model: &SvmModel, row: &[f64]) -> Result<f64, LearnError> {
    if row.len() != model.means.len() {
        return Err(LearnError::DimMismatch {
            model: model.means.len(),
            input: row.len(),
        });
    }
    let z: Vec<f64> = row
        .iter()
        .zip(model.means.iter().zip(&model.stds))
        .map(|(&v, (m, s))| (v - m) / s)
        .collect();
    let mut f = model.bias;
    for (sv, ay) in model.support.iter().zip(&model.alpha_y) {
        f += ay * rbf(sv, &z, model.gamma);
    }
    Ok(f)
}

pub fn svm_score_batch(model: &SvmModel, table: &FeatureTable) -> Result<Vec<f64>, LearnError> {
    (0..table.n_rows())
        .map(|r| svm_score(model, table.row(r)))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SvmFileHeader {
    c: f64,
    gamma: f64,
    feature_names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
    bias: f64,
    n_support: usize,
    diagnostics: SvmDiagnostics,
}

/// JSON header + f64 little-endian blobs (support vectors row-major, then
/// `alpha_y`).
pub fn save_svm_model(model: &SvmModel, path: &Path) -> Result<(), LearnError> {
    let header = SvmFileHeader {
        c: model.c,
        gamma: model.gamma,
        feature_names: model.feature_names.clone(),
        means: model.means.clone(),
        stds: model.stds.clone(),
        bias: model.bias,
        n_support: model.support.len(),
        diagnostics: model.diagnostics,
    };
    let htext = serde_json::to_vec(&header).expect("header serializes");
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"RSVM");
    bytes.extend_from_slice(&(htext.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&htext);
    for sv in &model.support {
        for &v in sv {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    for &a in &model.alpha_y {
        bytes.extend_from_slice(&a.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| LearnError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_svm_model(path: &Path) -> Result<SvmModel, LearnError> {
    let bad = |reason: String| LearnError::BadModelFile {
        path: path.display().to_string(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| LearnError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    if bytes.len() < 12 || &bytes[..4] != b"RSVM" {
        return Err(bad("not an SVM model file".to_string()));
    }
    let hlen = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let header: SvmFileHeader = serde_json::from_slice(
        bytes
            .get(12..12 + hlen)
            .ok_or_else(|| bad("truncated header".to_string()))?,
    )
    .map_err(|e| bad(format!("malformed header: {e}")))?;
    let d = header.feature_names.len();
    let blob = &bytes[12 + hlen..];
    let want = (header.n_support * d + header.n_support) * 8;
    if blob.len() != want {
        return Err(bad(format!("blob has {} bytes, expected {want}", blob.len())));
    }
    let mut vals = blob
        .chunks_exact(8)
        .map(|chunk| f64::from_le_bytes(chunk.try_into().unwrap()));
    let support: Vec<Vec<f64>> = (0..header.n_support)
        .map(|_| (0..d).map(|_| vals.next().unwrap()).collect())
        .collect();
    let alpha_y: Vec<f64> = (0..header.n_support).map(|_| vals.next().unwrap()).collect();
    Ok(SvmModel {
        c: header.c,
        gamma: header.gamma,
        feature_names: header.feature_names,
        means: header.means,
        stds: header.stds,
        support,
        alpha_y,
        bias: header.bias,
        diagnostics: header.diagnostics,
        alpha: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table_from(rows: &[(&[f64], u8)]) -> FeatureTable {
        let d = rows[0].0.len();
        let names: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
        let mut t = FeatureTable::new(names);
        for (i, (row, label)) in rows.iter().enumerate() {
            t.push_row(&format!("r{i}"), *label, row).unwrap();
        }
        t
    }

    #[test]
    fn symmetric_two_point_problem() {
        let t = table_from(&[(&[-1.0], 0), (&[1.0], 1)]);
        for c in [0.5, 1.0, 10.0] {
            let model = svm_train(
                &t,
                &SvmParams {
                    c,
                    gamma: GammaSpec::Value(0.7),
                    ..SvmParams::default()
                },
            )
            .unwrap();
            assert_abs_diff_eq!(model.bias, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(svm_score(&model, &[0.0]).unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn separable_data_with_large_c_classifies_training_set() {
        let rows: Vec<(Vec<f64>, u8)> = (0..20)
            .map(|i| {
                let x = if i < 10 { i as f64 * 0.1 } else { 5.0 + i as f64 * 0.1 };
                (vec![x, -x * 0.5], u8::from(i >= 10))
            })
            .collect();
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let t = table_from(&refs);
        let model = svm_train(
            &t,
            &SvmParams {
                c: 1e4,
                ..SvmParams::default()
            },
        )
        .unwrap();
        for r in 0..t.n_rows() {
            let f = svm_score(&model, t.row(r)).unwrap();
            let predicted = u8::from(f > 0.0);
            assert_eq!(predicted, t.labels()[r], "row {r} score {f}");
        }
        // Hard-margin support vectors meet the margin.
        for (i, &a) in model.alpha.iter().enumerate() {
            if a > 1e-8 && a < model.c * (1.0 - 1e-8) {
                let f = svm_score(&model, t.row(i)).unwrap();
                assert!(f.abs() >= 1.0 - 1e-6, "free SV row {i} has |f| = {}", f.abs());
            }
        }
    }

    #[test]
    fn kkt_invariants_hold() {
        let rows: Vec<(Vec<f64>, u8)> = (0..30)
            .map(|i| {
                let a = (i as f64 * 1.37).sin() * 2.0;
                let b = (i as f64 * 0.71).cos() * 2.0;
                (vec![a, b, a * b], u8::from((a + b) > 0.2))
            })
            .collect();
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let t = table_from(&refs);
        let model = svm_train(&t, &SvmParams::default()).unwrap();
        assert!(model.diagnostics.kkt_violation <= 1e-3);
        assert!(model.diagnostics.sum_alpha_y.abs() < 1e-9);
        assert!(model
            .alpha
            .iter()
            .all(|&a| (-1e-12..=model.c + 1e-12).contains(&a)));
    }

    #[test]
    fn batch_scoring_equals_per_row() {
        let t = table_from(&[
            (&[0.0, 1.0], 0),
            (&[1.0, 0.0], 1),
            (&[0.2, 0.8], 0),
            (&[0.9, 0.3], 1),
        ]);
        let model = svm_train(&t, &SvmParams::default()).unwrap();
        let batch = svm_score_batch(&model, &t).unwrap();
        for r in 0..t.n_rows() {
            assert_eq!(batch[r], svm_score(&model, t.row(r)).unwrap());
        }
    }

    #[test]
    fn affine_rescaling_is_absorbed_by_standardization() {
        let rows: Vec<(Vec<f64>, u8)> = (0..16)
            .map(|i| {
                let a = (i as f64 * 0.9).sin();
                let b = (i as f64 * 1.3).cos();
                (vec![a, b], u8::from(a > b))
            })
            .collect();
        let refs: Vec<(&[f64], u8)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let t = table_from(&refs);
        let scaled_rows: Vec<(Vec<f64>, u8)> = rows
            .iter()
            .map(|(r, l)| (vec![r[0] * 250.0 + 7.0, r[1] * 0.004 - 3.0], *l))
            .collect();
        let refs2: Vec<(&[f64], u8)> =
            scaled_rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let t2 = table_from(&refs2);
        let params = SvmParams::default();
        let m1 = svm_train(&t, &params).unwrap();
        let m2 = svm_train(&t2, &params).unwrap();
        for r in 0..t.n_rows() {
            let f1 = svm_score(&m1, t.row(r)).unwrap();
            let f2 = svm_score(&m2, t2.row(r)).unwrap();
            assert_abs_diff_eq!(f1, f2, epsilon = 1e-6);
        }
    }

    #[test]
    fn rejects_single_class_and_nonfinite() {
        let t = table_from(&[(&[1.0], 1), (&[2.0], 1)]);
        assert!(matches!(
            svm_train(&t, &SvmParams::default()),
            Err(LearnError::SingleClass)
        ));
        let mut t = FeatureTable::new(vec!["a".to_string()]);
        t.push_row("x", 0, &[f64::INFINITY]).unwrap();
        t.push_row("y", 1, &[1.0]).unwrap();
        match svm_train(&t, &SvmParams::default()) {
            Err(LearnError::NonFinite { row: 0, column }) => assert_eq!(column, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn model_file_round_trip() {
        let t = table_from(&[
            (&[0.0, 1.0], 0),
            (&[1.0, 0.0], 1),
            (&[0.2, 0.8], 0),
            (&[0.9, 0.3], 1),
        ]);
        let model = svm_train(&t, &SvmParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("svm.bin");
        save_svm_model(&model, &path).unwrap();
        let loaded = load_svm_model(&path).unwrap();
        for r in 0..t.n_rows() {
            assert_eq!(
                svm_score(&model, t.row(r)).unwrap(),
                svm_score(&loaded, t.row(r)).unwrap()
            );
        }
    }
}
