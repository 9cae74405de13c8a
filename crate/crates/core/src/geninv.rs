//! Left generalized inverse `X⁺ = (XᵀX)⁻¹Xᵀ` and elements of the precision
//! matrix `S = (XᵀX)⁻¹`, one row or one entry at a time.
//!
//! Row `i` of `X⁺` is `(q°_i)ᵀ [I − x_{i+1}(q°_{i+1})ᵀ] ⋯ [I − x_p(q°_p)ᵀ]`,
//! built left to right as row-vector updates, and `s^{ij} = <x⁺_i, x⁺_j>`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot_unchecked, DenseMatrix, DenseVector};
use crate::sgso::{sgso, SgsoBasis};

/// The rows `x⁺_1..x⁺_p` of a left generalized inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    rows: Vec<DenseVector>,
    source_dims: (usize, usize),
}

impl PseudoInverse {
    pub(crate) fn from_rows(rows: Vec<DenseVector>, source_dims: (usize, usize)) -> Self {
        PseudoInverse { rows, source_dims }
    }

    /// `(n, p)` of the matrix this inverts.
    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    /// Row `i` (0-based).
    pub fn row(&self, i: usize) -> &DenseVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[DenseVector] {
        &self.rows
    }

    /// The `p × n` matrix.
    pub fn to_matrix(&self) -> DenseMatrix {
        let (n, p) = self.source_dims;
        let mut m = DenseMatrix::zeros(p, n);
        for (i, r) in self.rows.iter().enumerate() {
            for (c, &v) in r.iter().enumerate() {
                m.set(i, c, v);
            }
        }
        m
    }

    /// `X⁺ v`, e.g. the OLS coefficients when `v` is the response.
    pub fn apply(&self, v: &[f64]) -> Result<DenseVector> {
        crate::matrix::check_len(v.len(), self.source_dims.0, "vector")?;
        Ok(self.rows.iter().map(|r| dot_unchecked(r, v)).collect())
    }
}

/// Row `i` (1-based) of `X⁺`.
pub fn pseudo_row(i: usize, x: &DenseMatrix, b: &SgsoBasis) -> Result<DenseVector> {
    if b.q().shape() != x.shape() {
        return Err(Error::Dimension(format!(
            "basis has shape {:?} but design matrix has shape {:?}",
            b.q().shape(),
            x.shape()
        )));
    }
    let p = x.ncols();
    if i == 0 || i > p {
        return Err(Error::IndexOutOfRange { index: i, len: p });
    }
    Ok(pseudo_row_unchecked(i - 1, x, b))
}

fn pseudo_row_unchecked(i: usize, x: &DenseMatrix, b: &SgsoBasis) -> DenseVector {
    let di = b.d()[i];
    let mut r: Vec<f64> = b.q().col(i).iter().map(|v| v / di).collect();
    for k in i + 1..x.ncols() {
        let c = dot_unchecked(&r, x.col(k));
        axpy(&mut r, -c / b.d()[k], b.q().col(k));
    }
    DenseVector::new(r)
}

/// All rows of `X⁺`, using the default pivot floor.
pub fn generalized_inverse(x: &DenseMatrix) -> Result<PseudoInverse> {
    generalized_inverse_with_floor(x, crate::DEFAULT_PIVOT_FLOOR)
}

pub fn generalized_inverse_with_floor(x: &DenseMatrix, pivot_floor: f64) -> Result<PseudoInverse> {
    let b = sgso(x, pivot_floor)?;
    Ok(generalized_inverse_from_basis(x, &b))
}

/// All rows of `X⁺` from an existing basis; rows are computed in parallel and
/// placed by index.
pub fn generalized_inverse_from_basis(x: &DenseMatrix, b: &SgsoBasis) -> PseudoInverse {
    let rows = (0..x.ncols())
        .into_par_iter()
        .map(|i| pseudo_row_unchecked(i, x, b))
        .collect();
    PseudoInverse::from_rows(rows, x.shape())
}

fn check_pair(i: usize, j: usize, p: usize) -> Result<(usize, usize)> {
    for k in [i, j] {
        if k == 0 || k > p {
            return Err(Error::IndexOutOfRange { index: k, len: p });
        }
    }
    Ok((i.min(j) - 1, i.max(j) - 1))
}

/// `s^{ij}` (1-based) from a full pseudoinverse. Symmetric bit for bit.
pub fn precision_element(i: usize, j: usize, pinv: &PseudoInverse) -> Result<f64> {
    let (a, b) = check_pair(i, j, pinv.rows.len())?;
    Ok(dot_unchecked(&pinv.rows[a], &pinv.rows[b]))
}

/// `s^{ij}` (1-based) computing only the two rows it needs.
pub fn precision_element_direct(i: usize, j: usize, x: &DenseMatrix, b: &SgsoBasis) -> Result<f64> {
    let (lo, hi) = check_pair(i, j, x.ncols())?;
    let r_lo = pseudo_row(lo + 1, x, b)?;
    if lo == hi {
        return Ok(dot_unchecked(&r_lo, &r_lo));
    }
    let r_hi = pseudo_row(hi + 1, x, b)?;
    Ok(dot_unchecked(&r_lo, &r_hi))
}

/// The full precision matrix `X⁺(X⁺)ᵀ`; upper triangle computed and mirrored.
pub fn precision_matrix(pinv: &PseudoInverse) -> DenseMatrix {
    let p = pinv.rows.len();
    let mut s = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = dot_unchecked(&pinv.rows[i], &pinv.rows[j]);
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    s
}
