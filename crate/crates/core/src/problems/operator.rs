use crate::error::{Error, Result};
use std::sync::atomic::{AtomicU64, Ordering};

/// Nonnegative sparse matrix in compressed-row form that counts its own
/// forward and adjoint applications.
///
/// Every stored entry is finite and >= 0, and every row has at least one
/// positive entry, so `(Ax)_i > 0` whenever `x > 0`.
#[derive(Debug)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    forward_count: AtomicU64,
    adjoint_count: AtomicU64,
}

impl Clone for SparseOperator {
    fn clone(&self) -> Self {
        SparseOperator {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.clone(),
            forward_count: AtomicU64::new(self.forward_count.load(Ordering::Relaxed)),
            adjoint_count: AtomicU64::new(self.adjoint_count.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for SparseOperator {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self.values == other.values
    }
}

impl SparseOperator {
    /// Builds the matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and explicit zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidParameter(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "entry ({r}, {c}) = {v} is not a finite nonnegative value"
                )));
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if v == 0.0 {
                continue;
            }
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        if let Some(r) = (0..rows).find(|&r| row_ptr[r] == row_ptr[r + 1]) {
            return Err(Error::InvalidParameter(format!(
                "row {r} has no positive entry"
            )));
        }
        Ok(SparseOperator {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            forward_count: AtomicU64::new(0),
            adjoint_count: AtomicU64::new(0),
        })
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        let mut triplets = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            triplets.extend(row.iter().enumerate().map(|(c, &v)| (r, c, v)));
        }
        Self::from_triplets(rows, cols, triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` over one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    /// `A x`. Counts one forward application.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "operand length must equal column count");
        self.forward_count.fetch_add(1, Ordering::Relaxed);
        (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `A^T y`. Counts one adjoint application.
    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "operand length must equal row count");
        self.adjoint_count.fetch_add(1, Ordering::Relaxed);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += v * yr;
            }
        }
        out
    }

    /// `(forward, adjoint)` application counts.
    pub fn counts(&self) -> (u64, u64) {
        (
            self.forward_count.load(Ordering::Relaxed),
            self.adjoint_count.load(Ordering::Relaxed),
        )
    }

    pub fn total_applications(&self) -> u64 {
        let (f, a) = self.counts();
        f + a
    }

    pub fn reset_counts(&self) {
        self.forward_count.store(0, Ordering::Relaxed);
        self.adjoint_count.store(0, Ordering::Relaxed);
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            out[*c] += v;
        }
        out
    }
}
