//! Closed-form least squares without matrix inversion or normalization.
//!
//! The upper factor `U` of the Gram matrix `XᵀX` and the square-root-free
//! Gram-Schmidt basis `Q` of `X` satisfy `U = QᵀX` with `diag(U) = diag(QᵀQ)`.
//! From that identity the crate builds:
//!
//! * full OLS coefficient vectors by back-recursion over `U` ([`ols::solve_all`]);
//! * any single coefficient without solving the system ([`ols::coeff_single`]);
//! * the left generalized inverse and individual precision elements ([`geninv`]);
//! * weighted least squares for any symmetric `W` ([`weighted`]);
//! * pairwise interaction scans with permutation p-values ([`epistasis`]).
//!
//! [`oracle`] holds deliberately different reference solvers used for
//! cross-checking.
//!
//! ```
//! use olsform::{fit, DenseMatrix};
//!
//! let x = DenseMatrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
//! let r = fit(&x, &[3.0, 5.0, 7.0, 9.0], true).unwrap();
//! assert!((r.beta[1] - 2.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod epistasis;
pub mod error;
pub mod geninv;
pub mod gram_lu;
pub mod matrix;
pub mod ols;
pub mod oracle;
pub mod sgso;
pub mod table;
pub mod weighted;

/// Relative pivot threshold below which a column counts as dependent.
pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-12;

pub use epistasis::{
    interaction_stat, pairwise_scan, permutation_pvalue, InteractionModel, PairOutcome, PairStat,
};
pub use error::{Error, Result};
pub use geninv::{
    generalized_inverse, generalized_inverse_from_basis, precision_element, precision_element_direct, precision_matrix,
    pseudo_row, PseudoInverse,
};
pub use gram_lu::{lu_upper, lu_upper_augmented, UpperFactor};
pub use matrix::{augmented_gram, dot, gram, prepend_ones, DenseMatrix, DenseVector};
pub use ols::{coeff_single, coeff_under_y_permutations, coeffs_projected, fit, solve_all, FitResult};
pub use sgso::{scaled_basis, sgso, SgsoBasis};
pub use weighted::{weighted_coeffs, weighted_fit, weighted_geninv, weighted_sgso, WeightedBasis};
