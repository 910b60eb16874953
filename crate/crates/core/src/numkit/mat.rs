use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{dim_err, invalid, Result};

/// Dense real matrix stored column-major, so that each sample (column) is a
/// contiguous slice.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(6) {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols.min(6) {
                write!(f, "{}{:.4}", if c > 0 { " " } else { "" }, self.get(r, c))?;
            }
            if self.cols > 6 {
                write!(f, " ..")?;
            }
        }
        if self.rows > 6 {
            write!(f, "; ..")?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from column-major data. Rejects length mismatches and
    /// non-finite values.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err("Mat::from_col_major", rows * cols, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("Mat::from_col_major: non-finite value"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from a list of equally long rows (handy in tests and examples).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err(invalid("Mat::from_rows: ragged rows"));
        }
        let m = Self::from_fn(nr, nc, |r, c| rows[r][c]);
        if m.data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("Mat::from_rows: non-finite value"));
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let nc = columns.len();
        let nr = columns.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(nr * nc);
        for col in columns {
            if col.len() != nr {
                return Err(invalid("Mat::from_columns: ragged columns"));
            }
            data.extend_from_slice(col);
        }
        Self::from_col_major(nr, nc, data)
    }

    pub fn column_vector(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.rows + r] = v;
    }

    #[inline]
    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Column-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Mat, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Mat> {
        if self.shape() != other.shape() {
            return Err(dim_err(op, shape_str(self), shape_str(other)));
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, "Mat::add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, "Mat::sub", |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Mat {
        self.map(|v| v * s)
    }

    /// `self · other`
    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(dim_err(
                "matmul",
                alloc::format!("lhs cols == rhs rows ({})", self.cols),
                other.rows,
            ));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in other.col(j).iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other`
    pub fn tr_matmul(&self, other: &Mat) -> Result<Mat> {
        if self.rows != other.rows {
            return Err(dim_err(
                "tr_matmul",
                alloc::format!("matching rows ({})", self.rows),
                other.rows,
            ));
        }
        Ok(Mat::from_fn(self.cols, other.cols, |i, j| {
            dot(self.col(i), other.col(j))
        }))
    }

    /// `self · otherᵀ`
    pub fn matmul_tr(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.cols {
            return Err(dim_err(
                "matmul_tr",
                alloc::format!("matching cols ({})", self.cols),
                other.cols,
            ));
        }
        let mut out = Mat::zeros(self.rows, other.rows);
        for k in 0..self.cols {
            let a = self.col(k);
            let b = other.col(k);
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0.0 {
                    continue;
                }
                let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (d, &ai) in dst.iter_mut().zip(a) {
                    *d += ai * bj;
                }
            }
        }
        Ok(out)
    }

    /// Columns `start..end` as a new matrix.
    pub fn cols_range(&self, start: usize, end: usize) -> Mat {
        assert!(
            start <= end && end <= self.cols,
            "column range out of bounds"
        );
        Mat {
            rows: self.rows,
            cols: end - start,
            data: self.data[start * self.rows..end * self.rows].to_vec(),
        }
    }

    /// Columns picked by index, in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &c in idx {
            data.extend_from_slice(self.col(c));
        }
        Mat {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Mat) -> Result<Mat> {
        if self.rows != other.rows && !(self.cols == 0 || other.cols == 0) {
            return Err(dim_err("hcat", self.rows, other.rows));
        }
        let rows = if self.cols == 0 {
            other.rows
        } else {
            self.rows
        };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat {
            rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    /// Writes `src` into columns starting at `start`.
    pub fn set_cols(&mut self, start: usize, src: &Mat) -> Result<()> {
        if src.rows != self.rows || start + src.cols > self.cols {
            return Err(dim_err(
                "set_cols",
                shape_str(self),
                alloc::format!("{} at column {}", shape_str(src), start),
            ));
        }
        self.data[start * self.rows..(start + src.cols) * self.rows].copy_from_slice(&src.data);
        Ok(())
    }

    /// Appends a constant-one row (bias feature).
    pub fn with_ones_row(&self) -> Mat {
        let mut data = Vec::with_capacity((self.rows + 1) * self.cols);
        for c in 0..self.cols {
            data.extend_from_slice(self.col(c));
            data.push(1.0);
        }
        Mat {
            rows: self.rows + 1,
            cols: self.cols,
            data,
        }
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn shape_str(m: &Mat) -> alloc::string::String {
    alloc::format!("{}x{}", m.rows, m.cols)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
