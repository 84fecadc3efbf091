use serde::{Deserialize, Serialize};

use crate::error::{DgfcError, Result};
use crate::linalg::Matrix;

/// Data type of one observed series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Continuous,
    Count,
}

impl DataKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DataKind::Continuous => "continuous",
            DataKind::Count => "count",
        }
    }

    pub fn parse(s: &str) -> Option<DataKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" => Some(DataKind::Continuous),
            "count" => Some(DataKind::Count),
            _ => None,
        }
    }
}

/// A T×n panel of observations with one name and one data kind per column.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    values: Matrix,
    names: Vec<String>,
    kinds: Vec<DataKind>,
}

impl TimeSeriesPanel {
    pub fn new(values: Matrix, names: Vec<String>, kinds: Vec<DataKind>) -> Result<Self> {
        let (t, n) = values.shape();
        if n == 0 {
            return Err(DgfcError::Validation("panel has no columns".into()));
        }
        if t < 2 {
            return Err(DgfcError::Validation(format!(
                "panel needs at least 2 rows, got {t}"
            )));
        }
        if names.len() != n || kinds.len() != n {
            return Err(DgfcError::Validation(format!(
                "expected {n} names and kinds, got {} and {}",
                names.len(),
                kinds.len()
            )));
        }
        for j in 0..n {
            for r in 0..t {
                let y = values[(r, j)];
                if !y.is_finite() {
                    return Err(DgfcError::Validation(format!(
                        "missing or non-finite value at row {}, column {}",
                        r + 1,
                        j + 1
                    )));
                }
                if kinds[j] == DataKind::Count && (y < 0.0 || y.fract() != 0.0) {
                    return Err(DgfcError::Validation(format!(
                        "count column '{}' has non-count value {y} at row {}",
                        names[j],
                        r + 1
                    )));
                }
            }
        }
        Ok(Self {
            values,
            names,
            kinds,
        })
    }

    /// Panel with generated names `y1..yn` and every column continuous.
    pub fn continuous(values: Matrix) -> Result<Self> {
        let n = values.ncols();
        Self::new(
            values,
            (1..=n).map(|i| format!("y{i}")).collect(),
            vec![DataKind::Continuous; n],
        )
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[DataKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).iter().copied().collect()
    }

    /// Rows `0..end` as a new panel.
    pub fn prefix(&self, end: usize) -> Result<Self> {
        let rows = self.values.rows(0, end).into_owned();
        Self::new(rows, self.names.clone(), self.kinds.clone())
    }

    /// Applies `f` to every entry of column `i`. Used to check invariance
    /// under monotone transforms.
    pub fn map_column(&self, i: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = self.values.clone();
        for r in 0..values.nrows() {
            values[(r, i)] = f(values[(r, i)]);
        }
        Self::new(values, self.names.clone(), self.kinds.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_bad_counts() {
        assert!(TimeSeriesPanel::continuous(Matrix::zeros(1, 2)).is_err());
        let v = Matrix::from_row_slice(2, 1, &[1.0, 2.5]);
        let err = TimeSeriesPanel::new(v, vec!["a".into()], vec![DataKind::Count]);
        assert!(matches!(err, Err(DgfcError::Validation(_))));
        let v = Matrix::from_row_slice(2, 1, &[1.0, f64::NAN]);
        assert!(TimeSeriesPanel::continuous(v).is_err());
    }
}
