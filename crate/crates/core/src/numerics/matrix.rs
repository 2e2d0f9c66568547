use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RTOL: f64 = 1e-8;

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns of unequal length"));
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub fn from_dmatrix(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub rtol_used: f64,
}

/// Numerical rank: the number of singular values at or above `rtol` times the largest one.
/// A matrix whose singular values are all zero has rank 0.
pub fn svd_rank(m: &ComplexMatrix, rtol: f64) -> Result<RankResult> {
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::invalid(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    let singular_values = singular_values(m);
    let largest = singular_values.first().copied().unwrap_or(0.0);
    let threshold = rtol * largest;
    let rank = singular_values
        .iter()
        .filter(|&&s| s > 0.0 && s >= threshold)
        .count();
    Ok(RankResult {
        rank,
        singular_values,
        rtol_used: rtol,
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows == 0 || m.cols == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.to_dmatrix().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Minimal-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &ComplexMatrix, b: &[C64], rcond: f64) -> Result<Vec<C64>> {
    if b.len() != a.rows {
        return Err(Error::invalid("right-hand side length mismatch"));
    }
    let svd = a.to_dmatrix().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = svd
        .solve(&rhs, rcond * smax)
        .map_err(|e| Error::Evaluation(e.to_string()))?;
    Ok(x.iter().copied().collect())
}
