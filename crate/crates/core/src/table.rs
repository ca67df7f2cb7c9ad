//! Feature tables: rows are nodules, columns are named features plus a
//! binary label. The CSV form writes values with 17 significant digits so
//! f64 round-trips are lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("row has {got} values, table has {want} feature columns")]
    RowLenMismatch { got: usize, want: usize },
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("id {0:?} contains a comma or is empty")]
    BadId(String),
    #[error("non-finite value in row {row} column {column:?}")]
    NonFinite { row: usize, column: String },
    #[error("unknown feature column {0:?}")]
    UnknownColumn(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

/// Row-major table of named feature values with ids and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    ids: Vec<String>,
    labels: Vec<u8>,
    values: Vec<f64>,
}

impl FeatureTable {
    pub fn new(feature_names: Vec<String>) -> Self {
        Self {
            feature_names,
            ids: Vec::new(),
            labels: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push_row(&mut self, id: &str, label: u8, row: &[f64]) -> Result<(), TableError> {
        if row.len() != self.feature_names.len() {
            return Err(TableError::RowLenMismatch {
                got: row.len(),
                want: self.feature_names.len(),
            });
        }
        if label > 1 {
            return Err(TableError::BadLabel(label));
        }
        if id.is_empty() || id.contains(',') {
            return Err(TableError::BadId(id.to_string()));
        }
        self.ids.push(id.to_string());
        self.labels.push(label);
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[r * d..(r + 1) * d]
    }

    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_features() + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.value(r, c)).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize, TableError> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| TableError::UnknownColumn(name.to_string()))
    }

    /// Fails with the offending row/column if any value is non-finite.
    pub fn check_finite(&self) -> Result<(), TableError> {
        for r in 0..self.n_rows() {
            for c in 0..self.n_features() {
                if !self.value(r, c).is_finite() {
                    return Err(TableError::NonFinite {
                        row: r,
                        column: self.feature_names[c].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// A new table restricted to the given feature columns, in that order.
    pub fn select_features(&self, columns: &[usize]) -> FeatureTable {
        let names = columns
            .iter()
            .map(|&c| self.feature_names[c].clone())
            .collect();
        let mut out = FeatureTable::new(names);
        for r in 0..self.n_rows() {
            let row: Vec<f64> = columns.iter().map(|&c| self.value(r, c)).collect();
            out.push_row(&self.ids[r], self.labels[r], &row)
                .expect("selection preserves validity");
        }
        out
    }

    /// A new table containing the given rows, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureTable {
        let mut out = FeatureTable::new(self.feature_names.clone());
        for &r in rows {
            out.push_row(&self.ids[r], self.labels[r], self.row(r))
                .expect("selection preserves validity");
        }
        out
    }

    /// Appends a synthetic row (used by SMOTE) with a generated id.
    pub fn push_synthetic(&mut self, id: &str, label: u8, row: Vec<f64>) -> Result<(), TableError> {
        self.push_row(id, label, &row)
    }

    /// CSV text: header `id,label,<feature names...>`, one row per nodule,
    /// values with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("id,label");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for r in 0..self.n_rows() {
            out.push_str(&self.ids[r]);
            let _ = write!(out, ",{}", self.labels[r]);
            for c in 0..self.n_features() {
                let _ = write!(out, ",{:.16e}", self.value(r, c));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), TableError> {
        fs::write(path, self.to_csv()).map_err(|e| TableError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn from_csv_str(text: &str, path_for_errors: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| TableError::Parse {
            path: path_for_errors.to_string(),
            line: 1,
            reason: "missing header".to_string(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[0] != "id" || cols[1] != "label" {
            return Err(TableError::Parse {
                path: path_for_errors.to_string(),
                line: 1,
                reason: "header must start with id,label".to_string(),
            });
        }
        let names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
        let mut table = FeatureTable::new(names);
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != table.n_features() + 2 {
                return Err(TableError::Parse {
                    path: path_for_errors.to_string(),
                    line: lineno + 1,
                    reason: format!(
                        "expected {} fields, found {}",
                        table.n_features() + 2,
                        parts.len()
                    ),
                });
            }
            let label: u8 = parts[1].parse().map_err(|_| TableError::Parse {
                path: path_for_errors.to_string(),
                line: lineno + 1,
                reason: format!("bad label {:?}", parts[1]),
            })?;
            let mut row = Vec::with_capacity(table.n_features());
            for p in &parts[2..] {
                let v: f64 = p.parse().map_err(|_| TableError::Parse {
                    path: path_for_errors.to_string(),
                    line: lineno + 1,
                    reason: format!("bad value {p:?}"),
                })?;
                row.push(v);
            }
            table.push_row(parts[0], label, &row)?;
        }
        Ok(table)
    }

    pub fn read_csv(path: &Path) -> Result<Self, TableError> {
        let text = fs::read_to_string(path).map_err(|e| TableError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    /// Horizontally concatenates feature columns of `other` (same rows, in
    /// the same order) onto `self`.
    pub fn concat_features(&self, other: &FeatureTable) -> Result<FeatureTable, TableError> {
        if other.n_rows() != self.n_rows() {
            return Err(TableError::RowLenMismatch {
                got: other.n_rows(),
                want: self.n_rows(),
            });
        }
        let mut names = self.feature_names.clone();
        names.extend(other.feature_names.iter().cloned());
        let mut out = FeatureTable::new(names);
        for r in 0..self.n_rows() {
            let mut row = self.row(r).to_vec();
            row.extend_from_slice(other.row(r));
            out.push_row(&self.ids[r], self.labels[r], &row)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureTable {
        let mut t = FeatureTable::new(vec!["a".to_string(), "b".to_string()]);
        t.push_row("n1", 0, &[1.0, -0.5]).unwrap();
        t.push_row("n2", 1, &[0.1234567890123456789, 3.0e-17]).unwrap();
        t
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let t = sample();
        let text = t.to_csv();
        let back = FeatureTable::from_csv_str(&text, "mem").unwrap();
        assert_eq!(back, t);
        // And byte-stable on rewrite.
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn selection_by_columns_and_rows() {
        let t = sample();
        let cols = t.select_features(&[1]);
        assert_eq!(cols.feature_names(), &["b".to_string()]);
        assert_eq!(cols.value(0, 0), -0.5);
        let rows = t.select_rows(&[1]);
        assert_eq!(rows.n_rows(), 1);
        assert_eq!(rows.ids(), &["n2".to_string()]);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut t = FeatureTable::new(vec!["a".to_string()]);
        assert!(matches!(
            t.push_row("x", 0, &[1.0, 2.0]),
            Err(TableError::RowLenMismatch { .. })
        ));
        assert!(matches!(t.push_row("x", 2, &[1.0]), Err(TableError::BadLabel(2))));
        assert!(matches!(
            t.push_row("a,b", 0, &[1.0]),
            Err(TableError::BadId(_))
        ));
    }

    #[test]
    fn check_finite_names_the_cell() {
        let mut t = FeatureTable::new(vec!["a".to_string(), "b".to_string()]);
        t.push_row("n1", 0, &[1.0, f64::NAN]).unwrap();
        match t.check_finite() {
            Err(TableError::NonFinite { row: 0, column }) => assert_eq!(column, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
