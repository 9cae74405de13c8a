//! Weighted least squares, `β(W) = (XᵀWX)⁻¹XᵀWy`, without a square root of `W`.
//!
//! The weighted basis orthogonalizes `Wx_i` against the plain columns `x_j`:
//! `q_i(W) = Wx_i − Σ_{j<i} <q_j(W), x_i>/<q_j(W), x_j> q_j(W)`, which makes
//! `Q(W)ᵀX` upper triangular. `W` only has to be symmetric and make `XᵀWX`
//! nonsingular; indefinite weights are fine, so pivots may be negative.

use crate::error::{Error, Result};
use crate::geninv::PseudoInverse;
use crate::matrix::{axpy, check_len, dot_unchecked, DenseMatrix, DenseVector};
use crate::sgso::{check_floor, check_shape};

/// Relative tolerance for accepting `W` as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Columns `q_i(W)` and pivots `<q_i(W), x_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBasis {
    qw: DenseMatrix,
    pivots: DenseVector,
}

impl WeightedBasis {
    pub fn qw(&self) -> &DenseMatrix {
        &self.qw
    }

    pub fn pivots(&self) -> &DenseVector {
        &self.pivots
    }

    pub fn n(&self) -> usize {
        self.qw.nrows()
    }
}

/// Checks that `w` is square of order `n` and symmetric within
/// [`SYMMETRY_TOL`]` · max(max|W|, 1)`.
pub fn check_weights(w: &DenseMatrix, n: usize) -> Result<()> {
    if w.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "weight matrix has shape {:?}, expected ({n}, {n})",
            w.shape()
        )));
    }
    let mut asym = 0.0_f64;
    for c in 0..n {
        for r in c + 1..n {
            asym = asym.max((w.get(r, c) - w.get(c, r)).abs());
        }
    }
    if asym > SYMMETRY_TOL * w.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    dot_unchecked(v, v).sqrt()
}

/// Dense diagonal weight matrix from a vector of weights.
pub fn diagonal_weights(w: &[f64]) -> DenseMatrix {
    DenseMatrix::from_diagonal(w)
}

/// `|pivot| ≤ floor · ‖Wx_i‖‖x_i‖`, the Cauchy-Schwarz bound on the pivot.
fn rank_check(i: usize, pivot: f64, scale: f64, floor: f64) -> Result<()> {
    if pivot.abs() <= floor * scale || pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::RankDeficient {
            column: i + 1,
            pivot,
        });
    }
    Ok(())
}

/// Builds `Q(W)`.
///
/// Uses the modified ordering: alongside `q_i(W)` the x-side working vector
/// `x̃_i` (with `q_i(W) = W x̃_i`) is reduced, and each coefficient is taken
/// against the partially reduced `x̃_i`. Pivots are `<q_i(W), x̃_i>`, equal to
/// `<q_i(W), x_i>` in exact arithmetic. With `W = I` every step is the same
/// floating-point operation as the unweighted basis.
pub fn weighted_sgso(x: &DenseMatrix, w: &DenseMatrix, pivot_floor: f64) -> Result<WeightedBasis> {
    check_shape(x)?;
    let (n, p) = x.shape();
    check_weights(w, n)?;
    check_floor(pivot_floor)?;
    let mut qw = w.matmul(x)?;
    let mut xt = x.clone();
    let mut pivots: Vec<f64> = Vec::with_capacity(p);
    for i in 0..p {
        let scale = norm(qw.col(i)) * norm(x.col(i));
        let (q_done, z) = qw.split_at_col_mut(i);
        let (x_done, v) = xt.split_at_col_mut(i);
        for (j, &pj) in pivots.iter().enumerate() {
            let qj = &q_done[j * n..(j + 1) * n];
            let xj = &x_done[j * n..(j + 1) * n];
            let c = dot_unchecked(qj, v) / pj;
            axpy(v, -c, xj);
            axpy(z, -c, qj);
        }
        let piv = dot_unchecked(z, v);
        rank_check(i, piv, scale, pivot_floor)?;
        pivots.push(piv);
    }
    Ok(WeightedBasis {
        qw,
        pivots: DenseVector::new(pivots),
    })
}

/// All weighted coefficients through the projector chain
/// `β_i(W) = q_i(W)ᵀ/π_i · Π_{k>i} [I − x_k q_k(W)ᵀ/π_k] y`, with `π_k` the
/// pivot of column `k`, sharing one partially projected response.
pub fn weighted_coeffs(x: &DenseMatrix, y: &[f64], b: &WeightedBasis) -> Result<DenseVector> {
    if b.qw.shape() != x.shape() {
        return Err(Error::Dimension(format!(
            "weighted basis has shape {:?} but design matrix has shape {:?}",
            b.qw.shape(),
            x.shape()
        )));
    }
    check_len(y.len(), x.nrows(), "response")?;
    let p = x.ncols();
    let mut z = y.to_vec();
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let c = dot_unchecked(b.qw.col(k), &z) / b.pivots[k];
        beta[k] = c;
        if k > 0 {
            axpy(&mut z, -c, x.col(k));
        }
    }
    Ok(DenseVector::new(beta))
}

/// Weighted coefficients straight from `(X, W, y)`.
pub fn weighted_fit(x: &DenseMatrix, w: &DenseMatrix, y: &[f64]) -> Result<DenseVector> {
    check_len(y.len(), x.nrows(), "response")?;
    let b = weighted_sgso(x, w, crate::DEFAULT_PIVOT_FLOOR)?;
    weighted_coeffs(x, y, &b)
}

/// `(XᵀWX)⁻¹XᵀW` by an in-place sweep over `B = WX`.
///
/// For each `i`, the trailing columns of `B` are orthogonalized against
/// `x_{i-1}` through `B[:, i-1]`, the pivot `d[i] = <B[:, i], x_i>` is taken,
/// and the leading columns are orthogonalized against `x_i` through `B[:, i]`.
/// At the end `B[:, k]ᵀ x_j = d[k] δ_kj`, so `diag(1/d) Bᵀ` is a left inverse.
pub fn weighted_geninv(x: &DenseMatrix, w: &DenseMatrix, pivot_floor: f64) -> Result<PseudoInverse> {
    check_shape(x)?;
    let (n, p) = x.shape();
    check_weights(w, n)?;
    check_floor(pivot_floor)?;
    let mut b = w.matmul(x)?;
    let scale: Vec<f64> = (0..p).map(|i| norm(b.col(i)) * norm(x.col(i))).collect();
    let mut d = vec![0.0; p];
    // d[0] = <Wx_1, x_1>
    d[0] = dot_unchecked(b.col(0), x.col(0));
    rank_check(0, d[0], scale[0], pivot_floor)?;
    for i in 1..p {
        let prev = b.col(i - 1).to_vec();
        for j in i..p {
            let c = dot_unchecked(&prev, x.col(j)) / d[i - 1];
            axpy(b.col_mut(j), -c, &prev);
        }
        d[i] = dot_unchecked(b.col(i), x.col(i));
        rank_check(i, d[i], scale[i], pivot_floor)?;
        let cur = b.col(i).to_vec();
        for k in 0..i {
            let c = dot_unchecked(x.col(i), b.col(k)) / d[i];
            axpy(b.col_mut(k), -c, &cur);
        }
    }
    let rows = (0..p)
        .map(|k| b.col(k).iter().map(|v| v / d[k]).collect())
        .collect();
    Ok(PseudoInverse::from_rows(rows, (n, p)))
}
