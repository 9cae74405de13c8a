//! The upper-triangular factor `U` of the Gram matrix, built row by row from
//! inner products without ever forming `L`.
//!
//! `U` equals `QᵀX` for the non-normalized Gram-Schmidt basis `Q` of the same
//! columns, and its diagonal holds the squared norms `<q_i, q_i>`. The unit
//! lower factor of the symmetric `LDLᵀ` form is `(U diag(1/u_ii))ᵀ`.

use crate::error::{Error, Result};
use crate::matrix::{augmented_gram, gram, DenseMatrix, DenseVector};
use crate::sgso::{check_floor, check_shape};

/// Upper factor of `XᵀX`, optionally carrying the extra column `u_{i,y}` of the
/// factor of `Xᵀ(X|y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperFactor {
    u: DenseMatrix,
    uy: Option<DenseVector>,
}

impl UpperFactor {
    /// Wraps a precomputed factor after checking its shape and pivots.
    pub fn new(u: DenseMatrix, uy: Option<DenseVector>) -> Result<Self> {
        let p = u.nrows();
        if p == 0 || u.ncols() != p {
            return Err(Error::Dimension(format!(
                "upper factor must be square and non-empty, got {:?}",
                u.shape()
            )));
        }
        if let Some(uy) = &uy {
            crate::matrix::check_len(uy.len(), p, "u_y column")?;
        }
        for i in 0..p {
            if u.get(i, i).is_nan() || u.get(i, i) <= 0.0 {
                return Err(Error::RankDeficient {
                    column: i + 1,
                    pivot: u.get(i, i),
                });
            }
            for j in 0..i {
                if u.get(i, j) != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({}, {}) below the diagonal is non-zero",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(UpperFactor { u, uy })
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn uy(&self) -> Option<&DenseVector> {
        self.uy.as_ref()
    }

    pub fn p(&self) -> usize {
        self.u.nrows()
    }

    /// The pivots `u_11..u_pp`.
    pub fn pivots(&self) -> DenseVector {
        (0..self.p()).map(|i| self.u.get(i, i)).collect()
    }
}

/// Eliminates rows `0..p` of the (possibly augmented) Gram block `g`.
///
/// Only entries on or above the diagonal are produced; the rest stay zero.
fn eliminate(g: &DenseMatrix, p: usize, pivot_floor: f64) -> Result<DenseMatrix> {
    check_floor(pivot_floor)?;
    let width = g.ncols();
    let mut u = DenseMatrix::zeros(p, width);
    for i in 0..p {
        for j in i..width {
            let mut v = g.get(i, j);
            for k in 0..i {
                v -= u.get(k, i) * u.get(k, j) / u.get(k, k);
            }
            u.set(i, j, v);
        }
        let uii = u.get(i, i);
        if uii.is_nan() || uii <= 0.0 || uii <= pivot_floor * g.get(i, i) {
            return Err(Error::RankDeficient {
                column: i + 1,
                pivot: uii,
            });
        }
    }
    Ok(u)
}

/// Upper factor of `XᵀX`.
pub fn lu_upper(x: &DenseMatrix, pivot_floor: f64) -> Result<UpperFactor> {
    check_shape(x)?;
    let p = x.ncols();
    let u = eliminate(&gram(x), p, pivot_floor)?;
    Ok(UpperFactor { u, uy: None })
}

/// Upper factor of `XᵀX` plus the column `u_{i,y}` from factoring `Xᵀ(X|y)`.
///
/// Runs the same arithmetic as [`lu_upper`] on `(X|y)`, so `uy` matches the
/// last column of that factor bit for bit.
pub fn lu_upper_augmented(x: &DenseMatrix, y: &[f64], pivot_floor: f64) -> Result<UpperFactor> {
    check_shape(x)?;
    let p = x.ncols();
    let full = eliminate(&augmented_gram(x, y)?, p, pivot_floor)?;
    let mut u = DenseMatrix::zeros(p, p);
    for j in 0..p {
        u.col_mut(j).copy_from_slice(full.col(j));
    }
    let uy = DenseVector::new(full.col(p).to_vec());
    Ok(UpperFactor { u, uy: Some(uy) })
}

/// `C = U / diag(U)`: every row divided by its pivot, with the scaled `u_{i,y}`
/// appended as a last column when present.
pub fn scaled_rows(f: &UpperFactor) -> DenseMatrix {
    let p = f.p();
    let width = p + usize::from(f.uy.is_some());
    let mut c = DenseMatrix::zeros(p, width);
    for i in 0..p {
        let uii = f.u.get(i, i);
        for j in i..p {
            c.set(i, j, f.u.get(i, j) / uii);
        }
        if let Some(uy) = &f.uy {
            c.set(i, p, uy[i] / uii);
        }
    }
    c
}
