use super::matrix::{ComplexMatrix, Matrix, RealMatrix};
use super::scalar::Scalar;
use super::NumericsError;

/// Pivot threshold used to declare a factorization singular:
/// `n · ε · max|entry|` of the matrix being factored.
pub fn pivot_tolerance(n: usize, max_abs_entry: f64) -> f64 {
    n as f64 * f64::EPSILON * max_abs_entry
}

/// Gaussian elimination with partial pivoting, solving `a · x = b` for all
/// columns of `b` at once.
fn lu_solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::Dimension(format!(
            "coefficient matrix must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if b.rows() != n {
        return Err(NumericsError::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let nrhs = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let tol = pivot_tolerance(n, a.max_abs());

    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, lu[(i, k)].modulus()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pmag <= tol || pmag == 0.0 {
            return Err(NumericsError::Singular { column: k });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            for j in 0..nrhs {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            if factor == T::zero() {
                continue;
            }
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= factor * v;
            }
            for j in 0..nrhs {
                let v = x[(k, j)];
                x[(i, j)] -= factor * v;
            }
        }
    }

    // back substitution
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in (i + 1)..n {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    if !x.all_finite() {
        return Err(NumericsError::Singular { column: n - 1 });
    }
    Ok(x)
}

/// Solves the real system `a · x = b`.
pub fn solve(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix, NumericsError> {
    lu_solve(a, b)
}

/// Solves the complex system `a · x = b` with partial pivoting.
pub fn complex_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    lu_solve(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_returns_rhs() {
        let b = ComplexMatrix::from_rows(&[[c(1.0, 2.0)], [c(-3.0, 0.5)], [c(0.0, 1.0)]]).unwrap();
        let x = complex_solve(&ComplexMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_divide() {
        let a = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 1.0)]).unwrap();
        let b = ComplexMatrix::from_rows(&[[c(2.0, 0.0)], [c(0.0, 1.0)]]).unwrap();
        let x = complex_solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_names_column() {
        let a = RealMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let b = RealMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        assert_eq!(solve(&a, &b), Err(NumericsError::Singular { column: 1 }));
        let z = RealMatrix::zeros(2, 2);
        assert_eq!(solve(&z, &b), Err(NumericsError::Singular { column: 0 }));
    }

    #[test]
    fn shape_errors() {
        let a = RealMatrix::zeros(2, 3);
        assert!(matches!(
            solve(&a, &RealMatrix::zeros(2, 1)),
            Err(NumericsError::Dimension(_))
        ));
        let a = RealMatrix::identity(2);
        assert!(matches!(
            solve(&a, &RealMatrix::zeros(3, 1)),
            Err(NumericsError::Dimension(_))
        ));
    }

    #[test]
    fn well_conditioned_residual() {
        // fixed pseudo-random 4x4, diagonally weighted
        let vals = [
            0.31, -0.72, 0.15, 0.94, -0.44, 0.27, 0.68, -0.13, 0.52, -0.91, 0.08, 0.37, -0.25,
            0.63, -0.58, 0.19,
        ];
        let a = ComplexMatrix::new(
            4,
            4,
            vals.iter()
                .enumerate()
                .map(|(k, &v)| {
                    let d = if k % 5 == 0 { 3.0 } else { 0.0 };
                    c(v + d, 0.5 * vals[(k * 7) % 16])
                })
                .collect(),
        )
        .unwrap();
        let b = ComplexMatrix::new(
            4,
            1,
            vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.0), c(0.0, 0.25)],
        )
        .unwrap();
        let x = complex_solve(&a, &b).unwrap();
        let r = a.matmul(&x).unwrap().sub(&b).unwrap();
        assert!(r.norm_fro() / b.norm_fro() <= 1e-12);
    }
}
