//! Ordinary least squares in closed form.
//!
//! Two routes to the same coefficients:
//!
//! * [`solve_all`] back-recurses over the augmented Gram factor,
//!   `β_i = u_{i,y}/u_ii − Σ_{j>i} β_j u_ij/u_ii`;
//! * [`coeff_single`] evaluates one coefficient directly from the
//!   Gram-Schmidt basis as `(q°_i)ᵀ [I − x_{i+1}(q°_{i+1})ᵀ] ⋯ [I − x_p(q°_p)ᵀ] y`,
//!   applying each bracket as an O(n) vector update.
//!
//! The second route touches `y` only through the projector chain, so batches
//! of permuted responses reuse one basis without residualizing anything.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram_lu::{lu_upper_augmented, UpperFactor};
use crate::matrix::{axpy, check_len, dot_unchecked, prepend_ones, DenseMatrix, DenseVector};
use crate::sgso::SgsoBasis;

/// Coefficients, residuals and residual sum of squares of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: DenseVector,
    pub residuals: DenseVector,
    pub rss: f64,
    /// `n - p`, counting the intercept column when one was added.
    pub dof: usize,
}

/// All coefficients from an augmented upper factor.
pub fn solve_all(f: &UpperFactor) -> Result<DenseVector> {
    let uy = f
        .uy()
        .ok_or_else(|| Error::InvalidArgument("factor has no u_y column".into()))?;
    let u = f.u();
    let p = f.p();
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let uii = u.get(i, i);
        let mut b = uy[i] / uii;
        for (j, bj) in beta.iter().enumerate().skip(i + 1) {
            b -= bj * u.get(i, j) / uii;
        }
        beta[i] = b;
    }
    Ok(DenseVector::new(beta))
}

fn check_basis(x: &DenseMatrix, b: &SgsoBasis) -> Result<()> {
    if b.q().shape() != x.shape() {
        return Err(Error::Dimension(format!(
            "basis has shape {:?} but design matrix has shape {:?}",
            b.q().shape(),
            x.shape()
        )));
    }
    Ok(())
}

fn check_index(i: usize, p: usize) -> Result<usize> {
    if i == 0 || i > p {
        return Err(Error::IndexOutOfRange { index: i, len: p });
    }
    Ok(i - 1)
}

/// Applies `[I − x_k (q°_k)ᵀ]` for `k = p..=stop+1` (0-based `stop`) to `z`
/// in place, then returns `(q°_stop)ᵀ z`.
fn chain(stop: usize, x: &DenseMatrix, b: &SgsoBasis, z: &mut [f64]) -> f64 {
    for k in (stop + 1..x.ncols()).rev() {
        let c = b.dual_dot(k, z);
        axpy(z, -c, x.col(k));
    }
    b.dual_dot(stop, z)
}

/// The `i`-th coefficient (1-based) through the projector chain.
pub fn coeff_single(i: usize, x: &DenseMatrix, y: &[f64], b: &SgsoBasis) -> Result<f64> {
    check_basis(x, b)?;
    let stop = check_index(i, x.ncols())?;
    check_len(y.len(), x.nrows(), "response")?;
    let mut z = y.to_vec();
    Ok(chain(stop, x, b, &mut z))
}

/// Every coefficient through the projector chain, sharing one partially
/// projected response across indices (O(np) total).
pub fn coeffs_projected(x: &DenseMatrix, y: &[f64], b: &SgsoBasis) -> Result<DenseVector> {
    check_basis(x, b)?;
    check_len(y.len(), x.nrows(), "response")?;
    let p = x.ncols();
    let mut z = y.to_vec();
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let c = b.dual_dot(k, &z);
        beta[k] = c;
        if k > 0 {
            axpy(&mut z, -c, x.col(k));
        }
    }
    Ok(DenseVector::new(beta))
}

/// Coefficient `i` for every column of `ys`, one basis shared by all.
///
/// Columns are processed in parallel; each uses exactly the arithmetic of
/// [`coeff_single`], so results do not depend on scheduling.
pub fn coeff_under_y_permutations(
    i: usize,
    x: &DenseMatrix,
    ys: &DenseMatrix,
    b: &SgsoBasis,
) -> Result<DenseVector> {
    check_basis(x, b)?;
    let stop = check_index(i, x.ncols())?;
    if ys.nrows() != x.nrows() {
        return Err(Error::Dimension(format!(
            "response columns have length {}, expected {}",
            ys.nrows(),
            x.nrows()
        )));
    }
    let out: Vec<f64> = (0..ys.ncols())
        .into_par_iter()
        .map(|k| {
            let mut z = ys.col(k).to_vec();
            chain(stop, x, b, &mut z)
        })
        .collect();
    Ok(DenseVector::new(out))
}

/// Least-squares fit of `y` on `x`, optionally with a leading intercept column.
pub fn fit(x: &DenseMatrix, y: &[f64], intercept: bool) -> Result<FitResult> {
    fit_with_floor(x, y, intercept, crate::DEFAULT_PIVOT_FLOOR)
}

pub fn fit_with_floor(
    x: &DenseMatrix,
    y: &[f64],
    intercept: bool,
    pivot_floor: f64,
) -> Result<FitResult> {
    check_len(y.len(), x.nrows(), "response")?;
    let design;
    let xd = if intercept {
        design = prepend_ones(x);
        &design
    } else {
        x
    };
    let (n, p) = xd.shape();
    if n <= p {
        return Err(Error::InsufficientRows { rows: n, params: p });
    }
    let f = lu_upper_augmented(xd, y, pivot_floor)?;
    let beta = solve_all(&f)?;
    let fitted = xd.matvec(&beta)?;
    let residuals: DenseVector = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss = dot_unchecked(&residuals, &residuals);
    Ok(FitResult {
        beta,
        residuals,
        rss,
        dof: n - p,
    })
}
