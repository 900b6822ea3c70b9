//! The aligned design matrix for one (q, h) specification.

use super::QregError;
use chrono::NaiveDate;
use serde::Serialize;

pub const INTERCEPT: &str = "intercept";

/// Target vector plus named regressor columns, all over the same trading
/// dates. Construction enforces: equal lengths, finite values, q in (0, 1),
/// h at most one week, and an all-ones `intercept` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFrame {
    q: f64,
    h: usize,
    row_dates: Vec<NaiveDate>,
    target: Vec<f64>,
    names: Vec<String>,
    cols: Vec<Vec<f64>>,
    emotion_col: Option<String>,
}

impl RegressionFrame {
    pub fn new(
        q: f64,
        h: usize,
        row_dates: Vec<NaiveDate>,
        target: Vec<f64>,
        columns: Vec<(String, Vec<f64>)>,
        emotion_col: Option<String>,
    ) -> Result<Self, QregError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QregError::InvalidFrame(format!("q={q} outside (0,1)")));
        }
        if h > 5 {
            return Err(QregError::InvalidFrame(format!("lag h={h} exceeds 5")));
        }
        let n = target.len();
        if row_dates.len() != n {
            return Err(QregError::InvalidFrame("row_dates length mismatch".into()));
        }
        if columns.is_empty() {
            return Err(QregError::InvalidFrame("no regressor columns".into()));
        }
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        for (name, col) in columns {
            if col.len() != n {
                return Err(QregError::InvalidFrame(format!(
                    "column {name:?} length {} != {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(QregError::InvalidFrame(format!(
                    "column {name:?} has non-finite values"
                )));
            }
            if names.contains(&name) {
                return Err(QregError::InvalidFrame(format!("duplicate column {name:?}")));
            }
            names.push(name);
            cols.push(col);
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(QregError::InvalidFrame("target has non-finite values".into()));
        }
        match names.iter().position(|n| n == INTERCEPT) {
            Some(i) if cols[i].iter().all(|&v| v == 1.0) => {}
            Some(_) => {
                return Err(QregError::InvalidFrame(
                    "intercept column must be all ones".into(),
                ))
            }
            None => {
                return Err(QregError::InvalidFrame(
                    "frame must contain an intercept column".into(),
                ))
            }
        }
        if let Some(e) = &emotion_col {
            if !names.iter().any(|n| n == e) {
                return Err(QregError::InvalidFrame(format!(
                    "emotion column {e:?} not among columns"
                )));
            }
        }
        Ok(Self {
            q,
            h,
            row_dates,
            target,
            names,
            cols,
            emotion_col,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row_dates(&self) -> &[NaiveDate] {
        &self.row_dates
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.cols
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.cols[i].as_slice())
    }

    pub fn emotion_col(&self) -> Option<&str> {
        self.emotion_col.as_deref()
    }

    /// Regressor values of row `i` as (name, value) pairs.
    pub fn row(&self, i: usize) -> Vec<(String, f64)> {
        self.names
            .iter()
            .zip(&self.cols)
            .map(|(n, c)| (n.clone(), c[i]))
            .collect()
    }

    pub fn with_q(&self, q: f64) -> Result<Self, QregError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QregError::InvalidFrame(format!("q={q} outside (0,1)")));
        }
        let mut f = self.clone();
        f.q = q;
        Ok(f)
    }

    /// Contiguous row window `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.n_rows(), "window out of range");
        Self {
            q: self.q,
            h: self.h,
            row_dates: self.row_dates[start..start + len].to_vec(),
            target: self.target[start..start + len].to_vec(),
            names: self.names.clone(),
            cols: self
                .cols
                .iter()
                .map(|c| c[start..start + len].to_vec())
                .collect(),
            emotion_col: self.emotion_col.clone(),
        }
    }

    /// Frame without one named column (the benchmark drops the emotion
    /// column; rank inversion drops the column under test).
    pub fn without_column(&self, name: &str) -> Result<Self, QregError> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| QregError::MissingRegressor(name.to_string()))?;
        if self.names.len() == 1 {
            return Err(QregError::InvalidFrame("cannot drop the only column".into()));
        }
        let mut names = self.names.clone();
        let mut cols = self.cols.clone();
        names.remove(i);
        cols.remove(i);
        Ok(Self {
            q: self.q,
            h: self.h,
            row_dates: self.row_dates.clone(),
            target: self.target.clone(),
            names,
            cols,
            emotion_col: self.emotion_col.clone().filter(|e| e != name),
        })
    }

    /// Names of non-intercept columns that are constant over the frame.
    pub fn degenerate_columns(&self) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.cols)
            .filter(|(n, col)| {
                n.as_str() != INTERCEPT && col.windows(2).all(|w| w[0] == w[1])
            })
            .map(|(n, _)| n.clone())
            .collect()
    }
}
