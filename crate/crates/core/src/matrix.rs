//! Dense column-major storage and the inner-product primitives everything else
//! is built from.
//!
//! All reductions accumulate in `f64` in ascending index order, so the same
//! inputs always produce the same bits.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Self {
        DenseVector(data)
    }

    /// Builds a vector from external data, rejecting NaN and infinities.
    /// Error coordinates report the element as row `k + 1` of column 1.
    pub fn checked(data: Vec<f64>) -> Result<Self> {
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k + 1, col: 1 });
        }
        Ok(DenseVector(data))
    }

    pub fn zeros(len: usize) -> Self {
        DenseVector(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Arithmetic mean; zero for an empty vector.
    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    /// Copy with the mean subtracted from every entry.
    pub fn centered(&self) -> DenseVector {
        let m = self.mean();
        DenseVector(self.0.iter().map(|v| v - m).collect())
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        DenseVector(iter.into_iter().collect())
    }
}

/// A dense real matrix in column-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Wraps column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, data[r * cols + c]);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), ncols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {ncols}",
                    r + 1,
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let nrows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut data = Vec::with_capacity(nrows * columns.len());
        for (j, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != nrows {
                return Err(Error::Dimension(format!(
                    "column {} has {} entries, expected {nrows}",
                    j + 1,
                    col.len()
                )));
            }
            data.extend_from_slice(col);
        }
        Ok(DenseMatrix {
            rows: nrows,
            cols: columns.len(),
            data,
        })
    }

    /// Rejects NaN/Inf entries, reporting 1-based coordinates.
    pub fn check_finite(&self) -> Result<()> {
        for c in 0..self.cols {
            for (r, v) in self.col(c).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: r + 1,
                        col: c + 1,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Columns `0..j` (read-only, contiguous) and column `j` (mutable).
    pub(crate) fn split_at_col_mut(&mut self, j: usize) -> (&[f64], &mut [f64]) {
        let n = self.rows;
        let (head, tail) = self.data.split_at_mut(j * n);
        (head, &mut tail[..n])
    }

    pub fn column(&self, j: usize) -> DenseVector {
        DenseVector::new(self.col(j).to_vec())
    }

    pub fn row(&self, i: usize) -> DenseVector {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.get(r, c));
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &c in cols {
            data.extend_from_slice(self.col(c));
        }
        DenseMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Appends `v` as a new last column.
    pub fn hcat_column(&self, v: &[f64]) -> Result<DenseMatrix> {
        check_len(v.len(), self.rows, "appended column")?;
        let mut data = self.data.clone();
        data.extend_from_slice(v);
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols + 1,
            data,
        })
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = out.col_mut(j);
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b == 0.0 {
                    continue;
                }
                axpy(dst, b, &self.data[k * self.rows..(k + 1) * self.rows]);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<DenseVector> {
        check_len(v.len(), self.cols, "vector")?;
        let mut out = vec![0.0; self.rows];
        for (k, &b) in v.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            axpy(&mut out, b, self.col(k));
        }
        Ok(DenseVector::new(out))
    }

    /// `selfᵀ v`, one inner product per column.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<DenseVector> {
        check_len(v.len(), self.rows, "vector")?;
        Ok((0..self.cols).map(|j| dot_unchecked(self.col(j), v)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "cannot compare {:?} with {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }
}

pub(crate) fn check_len(got: usize, expected: usize, what: &str) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension(format!(
            "{what} has length {got}, expected {expected}"
        )));
    }
    Ok(())
}

/// Inner product of two equally long vectors.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(v.len(), u.len(), "second operand")?;
    Ok(dot_unchecked(u, v))
}

#[inline]
pub(crate) fn dot_unchecked(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = 0.0;
    for k in 0..u.len() {
        acc += u[k] * v[k];
    }
    acc
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// The Gram matrix `XᵀX`. The upper triangle is computed and mirrored, so the
/// result is exactly symmetric.
pub fn gram(x: &DenseMatrix) -> DenseMatrix {
    let p = x.ncols();
    let mut g = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = dot_unchecked(x.col(i), x.col(j));
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

/// The `p × (p+1)` matrix `[XᵀX | Xᵀy]`.
pub fn augmented_gram(x: &DenseMatrix, y: &[f64]) -> Result<DenseMatrix> {
    check_len(y.len(), x.nrows(), "response")?;
    let p = x.ncols();
    let g = gram(x);
    let mut out = DenseMatrix::zeros(p, p + 1);
    for j in 0..p {
        out.col_mut(j).copy_from_slice(g.col(j));
    }
    for i in 0..p {
        out.set(i, p, dot_unchecked(x.col(i), y));
    }
    Ok(out)
}

/// `(1 | X)`: a column of ones followed by the columns of `x`.
pub fn prepend_ones(x: &DenseMatrix) -> DenseMatrix {
    let n = x.nrows();
    let mut data = vec![1.0; n];
    data.extend_from_slice(x.as_col_major());
    DenseMatrix {
        rows: n,
        cols: x.ncols() + 1,
        data,
    }
}
