//! Dense row-major matrices.
//!
//! Everything in this crate is sized for graphs of at most a few thousand
//! nodes, so a flat `Vec<T>` with explicit strides is all that is needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Binary matrix stored as bytes in {0, 1}.
pub type BinaryMatrix = Dense<u8>;
pub type RealMatrix = Dense<f64>;

impl<T: Copy + Default> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::default())
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Dense {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim("matrix buffer", rows * cols, data.len())?;
        Ok(Dense { rows, cols, data })
    }

    /// Builds a matrix from nested rows. `cols` is needed so that a matrix
    /// with zero rows still has a well-defined width.
    pub fn from_rows(rows: &[Vec<T>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(invalid(alloc::format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Dense {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Returns a copy grown to `rows + extra_rows` by `cols + extra_cols`,
    /// new cells set to `T::default()`.
    pub fn grown(&self, extra_rows: usize, extra_cols: usize) -> Self {
        let mut out = Self::zeros(self.rows + extra_rows, self.cols + extra_cols);
        for i in 0..self.rows {
            out.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
        }
        out
    }

    /// Keeps only the listed columns, in order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, keep.len());
        for i in 0..self.rows {
            for (dst, &src) in keep.iter().enumerate() {
                out.set(i, dst, self.get(i, src));
            }
        }
        out
    }

    /// Keeps only the listed rows and columns (square sub-matrix selection).
    pub fn select_square(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(keep.len(), keep.len());
        for (di, &si) in keep.iter().enumerate() {
            for (dj, &sj) in keep.iter().enumerate() {
                out.set(di, dj, self.get(si, sj));
            }
        }
        out
    }
}

impl Dense<u8> {
    /// True when column `k` has no ones.
    pub fn column_is_empty(&self, k: usize) -> bool {
        (0..self.rows).all(|i| self.get(i, k) == 0)
    }

    pub fn column_sum(&self, k: usize) -> usize {
        (0..self.rows).map(|i| self.get(i, k) as usize).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v <= 1)
    }
}

impl Dense<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| libm::fabs(*v).max(m))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
