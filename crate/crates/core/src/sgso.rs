//! Gram-Schmidt orthogonalization without normalization.
//!
//! Columns are orthogonalized but never scaled to unit length, so no square
//! roots are taken. The squared norms `d[i] = <q_i, q_i>` are kept alongside
//! the basis and double as the pivots of the Gram matrix's upper factor.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot_unchecked, DenseMatrix, DenseVector};

/// Orthogonal, non-normalized columns `q_1..q_p` of a design matrix together
/// with their squared norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SgsoBasis {
    q: DenseMatrix,
    d: DenseVector,
    pivot_floor: f64,
}

impl SgsoBasis {
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// Squared norms `<q_i, q_i>`.
    pub fn d(&self) -> &DenseVector {
        &self.d
    }

    pub fn pivot_floor(&self) -> f64 {
        self.pivot_floor
    }

    pub fn nrows(&self) -> usize {
        self.q.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.q.ncols()
    }

    /// `<q_k, v> / <q_k, q_k>`, i.e. `(q°_k)ᵀ v`.
    #[inline]
    pub(crate) fn dual_dot(&self, k: usize, v: &[f64]) -> f64 {
        dot_unchecked(self.q.col(k), v) / self.d[k]
    }

    /// The dual basis `Q°` with column `i` equal to `q_i / d[i]`.
    pub fn scaled_basis(&self) -> DenseMatrix {
        let mut out = self.q.clone();
        for (j, &dj) in self.d.iter().enumerate() {
            for v in out.col_mut(j) {
                *v /= dj;
            }
        }
        out
    }
}

pub(crate) fn check_shape(x: &DenseMatrix) -> Result<()> {
    let (n, p) = x.shape();
    if p == 0 {
        return Err(Error::Dimension("design matrix has no columns".into()));
    }
    if n < p {
        return Err(Error::InsufficientRows { rows: n, params: p });
    }
    Ok(())
}

pub(crate) fn check_floor(pivot_floor: f64) -> Result<()> {
    if pivot_floor.is_nan() || pivot_floor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pivot floor must be non-negative, got {pivot_floor}"
        )));
    }
    Ok(())
}

/// Orthogonalizes the columns of `x` in order.
///
/// Each working column has the projection onto every earlier `q_j` removed in
/// turn, with the coefficient taken against the partially reduced vector
/// (modified ordering). Column `i` is rejected when its squared residual norm
/// falls to `pivot_floor` times its own squared norm, so the test does not
/// depend on the scale of any column.
pub fn sgso(x: &DenseMatrix, pivot_floor: f64) -> Result<SgsoBasis> {
    check_shape(x)?;
    check_floor(pivot_floor)?;
    let p = x.ncols();
    let mut q = x.clone();
    let mut d: Vec<f64> = Vec::with_capacity(p);
    for i in 0..p {
        let (done, work) = q.split_at_col_mut(i);
        for (j, &dj) in d.iter().enumerate() {
            let qj = &done[j * work.len()..(j + 1) * work.len()];
            let c = dot_unchecked(qj, work) / dj;
            axpy(work, -c, qj);
        }
        let di = dot_unchecked(work, work);
        let own = dot_unchecked(x.col(i), x.col(i));
        if di <= pivot_floor * own || di == 0.0 {
            return Err(Error::RankDeficient {
                column: i + 1,
                pivot: di,
            });
        }
        d.push(di);
    }
    Ok(SgsoBasis {
        q,
        d: DenseVector::new(d),
        pivot_floor,
    })
}

/// `Q°` for a basis.
pub fn scaled_basis(b: &SgsoBasis) -> DenseMatrix {
    b.scaled_basis()
}
