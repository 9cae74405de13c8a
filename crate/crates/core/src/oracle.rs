//! Brute-force reference solvers used to cross-check the closed forms.
//!
//! Everything here uses Gaussian elimination with partial pivoting on
//! explicitly formed normal equations, or transcribes the explicit
//! four-regressor formulas with a two-column projector. None of it touches the
//! Gram-Schmidt basis or the upper factor, so agreement between the two sides
//! is evidence rather than tautology. Speed is not a goal.

use crate::error::{Error, Result};
use crate::matrix::{check_len, dot, gram, DenseMatrix, DenseVector};

/// Pivots at or below this fraction of the largest entry are treated as zero.
pub const ORACLE_PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    GaussNormalEquations,
    ClosedFormP4,
}

impl OracleMethod {
    pub fn tag(self) -> &'static str {
        match self {
            OracleMethod::GaussNormalEquations => "gauss-normal-eq",
            OracleMethod::ClosedFormP4 => "closed-form-p4",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub beta: DenseVector,
    pub method: OracleMethod,
}

/// Solves `A X = B` for square `A` by elimination with row swaps.
pub fn gauss_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "cannot solve {:?} system with right-hand side {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let k = b.ncols();
    // row-major working copy of [A | B]
    let width = n + k;
    let mut w = vec![0.0; n * width];
    for r in 0..n {
        for c in 0..n {
            w[r * width + c] = a.get(r, c);
        }
        for c in 0..k {
            w[r * width + n + c] = b.get(r, c);
        }
    }
    let scale = a.max_abs();
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, w[r * width + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= ORACLE_PIVOT_TOL * scale || piv_abs == 0.0 {
            return Err(Error::SingularSystem {
                step: col + 1,
                pivot: piv_abs,
            });
        }
        if piv_row != col {
            for c in 0..width {
                w.swap(col * width + c, piv_row * width + c);
            }
        }
        let piv = w[col * width + col];
        for r in col + 1..n {
            let f = w[r * width + col] / piv;
            if f == 0.0 {
                continue;
            }
            for c in col..width {
                w[r * width + c] -= f * w[col * width + c];
            }
        }
    }
    let mut x = DenseMatrix::zeros(n, k);
    for c in 0..k {
        for r in (0..n).rev() {
            let mut v = w[r * width + n + c];
            for j in r + 1..n {
                v -= w[r * width + j] * x.get(j, c);
            }
            x.set(r, c, v / w[r * width + r]);
        }
    }
    Ok(x)
}

/// OLS coefficients from `XᵀX β = Xᵀy` by pivoted elimination.
pub fn gauss_solve_normal_equations(x: &DenseMatrix, y: &[f64]) -> Result<OracleSolution> {
    check_len(y.len(), x.nrows(), "response")?;
    let g = gram(x);
    let xty = x.tr_matvec(y)?;
    let rhs = DenseMatrix::from_columns(&[xty.as_slice()])?;
    let beta = gauss_solve(&g, &rhs)?.column(0);
    Ok(OracleSolution {
        beta,
        method: OracleMethod::GaussNormalEquations,
    })
}

/// `(XᵀWX)⁻¹XᵀWy` by pivoted elimination.
pub fn gauss_solve_weighted(x: &DenseMatrix, w: &DenseMatrix, y: &[f64]) -> Result<DenseVector> {
    check_len(y.len(), x.nrows(), "response")?;
    let wx = w.matmul(x)?;
    let a = x.transpose().matmul(&wx)?;
    let wy = w.matvec(y)?;
    let rhs = DenseMatrix::from_columns(&[x.tr_matvec(&wy)?.as_slice()])?;
    Ok(gauss_solve(&a, &rhs)?.column(0))
}

/// Inverse by elimination on `[A | I]`.
pub fn gauss_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    gauss_solve(a, &DenseMatrix::identity(a.nrows()))
}

/// Projector onto the complement of `span(x1, x2)`, applied as an action.
struct TwoColumnComplement<'a> {
    x1: &'a [f64],
    x2t: Vec<f64>,
    n11: f64,
    n22: f64,
}

impl<'a> TwoColumnComplement<'a> {
    fn new(x1: &'a [f64], x2: &'a [f64]) -> Result<Self> {
        let n11 = dot(x1, x1)?;
        let n12 = dot(x1, x2)?;
        let n22_raw = dot(x2, x2)?;
        let x2t: Vec<f64> = x2.iter().zip(x1).map(|(b, a)| b - n12 / n11 * a).collect();
        let n22 = n22_raw - n12 * n12 / n11;
        if n11 <= 0.0 {
            return Err(Error::SingularSystem { step: 1, pivot: n11 });
        }
        if n22.abs() <= ORACLE_PIVOT_TOL * n22_raw {
            return Err(Error::SingularSystem { step: 2, pivot: n22 });
        }
        Ok(TwoColumnComplement { x1, x2t, n11, n22 })
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let a = dot(self.x1, v).unwrap_or(0.0) / self.n11;
        let b = dot(&self.x2t, v).unwrap_or(0.0) / self.n22;
        v.iter()
            .zip(self.x1)
            .zip(&self.x2t)
            .map(|((vi, x1i), x2i)| vi - a * x1i - b * x2i)
            .collect()
    }
}

/// `(β3, β4)` of a four-column regression from the explicit ratios of
/// projected inner products `x_aᵀ P x_b`, with `P` the complement projector
/// of the first two columns.
pub fn closed_form_p4(x: &DenseMatrix, y: &[f64]) -> Result<(f64, f64)> {
    if x.ncols() != 4 {
        return Err(Error::Dimension(format!(
            "closed form needs exactly 4 columns, got {}",
            x.ncols()
        )));
    }
    check_len(y.len(), x.nrows(), "response")?;
    let (x3, x4) = (x.col(2), x.col(3));
    let proj = TwoColumnComplement::new(x.col(0), x.col(1))?;
    let (px3, px4, py) = (proj.apply(x3), proj.apply(x4), proj.apply(y));
    let s33 = dot(x3, &px3)?;
    let s44 = dot(x4, &px4)?;
    let s34 = dot(x3, &px4)?;
    let s3y = dot(x3, &py)?;
    let s4y = dot(x4, &py)?;
    let den = s33 * s44 - s34 * s34;
    if den.abs() <= ORACLE_PIVOT_TOL * (s33 * s44).abs() || den == 0.0 {
        return Err(Error::SingularSystem { step: 3, pivot: den });
    }
    let beta3 = (s44 * s3y - s34 * s4y) / den;
    let beta4 = (s33 * s4y - s34 * s3y) / den;
    Ok((beta3, beta4))
}

/// [`closed_form_p4`] wrapped as an oracle solution holding `(β3, β4)`.
pub fn closed_form_p4_solution(x: &DenseMatrix, y: &[f64]) -> Result<OracleSolution> {
    let (b3, b4) = closed_form_p4(x, y)?;
    Ok(OracleSolution {
        beta: DenseVector::new(vec![b3, b4]),
        method: OracleMethod::ClosedFormP4,
    })
}
