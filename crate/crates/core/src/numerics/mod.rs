//! Dense real and complex linear-algebra kernels.
//!
//! Everything here is a pure function of its inputs: eigenvalues of real
//! matrices (balancing, Hessenberg reduction, Francis double-shift QR),
//! singular values of real or complex matrices (Householder
//! bidiagonalization followed by implicit-shift QR on the bidiagonal),
//! the matrix exponential (degree-13 Padé with scaling and squaring) and
//! pivoted LU solves.

mod eigen;
mod expm;
mod lu;
mod matrix;
mod scalar;
mod svd;

pub use eigen::eigenvalues;
pub use expm::expm;
pub use lu::{complex_solve, pivot_tolerance, solve};
pub use matrix::{ComplexMatrix, Matrix, RealMatrix};
pub use num_complex::Complex64;
pub use scalar::Scalar;
pub use svd::singular_values;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error(
        "QR iteration did not converge for eigenvalue index {index} after {iterations} sweeps"
    )]
    Convergence { index: usize, iterations: usize },
    #[error("bidiagonal QR did not converge for singular value index {index}")]
    SvdConvergence { index: usize },
    #[error("overflow while squaring the Padé approximant")]
    Overflow,
    #[error("matrix is numerically singular at column {column}")]
    Singular { column: usize },
}
