use super::matrix::Matrix;
use super::scalar::Scalar;
use super::NumericsError;

const MAX_SWEEPS_PER_VALUE: usize = 75;

/// Singular values of a real or complex matrix, sorted descending.
///
/// Returns `min(rows, cols)` nonnegative values.
pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Result<Vec<f64>, NumericsError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(NumericsError::Dimension(
            "empty matrix has no singular values".into(),
        ));
    }
    let work = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let (mut diag, mut sup) = bidiagonalize(work);
    bidiagonal_qr(&mut diag, &mut sup)?;
    diag.sort_by(|a, b| b.total_cmp(a));
    Ok(diag)
}

/// Householder vector for `x`: returns `(v, beta, alpha)` with
/// `(I − beta·v·vᴴ)·x = alpha·e₁`. `beta == 0` means nothing to reflect.
fn householder<T: Scalar>(x: &[T]) -> (Vec<T>, f64, T) {
    let norm = x.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (x.to_vec(), 0.0, T::zero());
    }
    let x0 = x[0];
    let x0_abs = x0.modulus();
    let phase = if x0_abs == 0.0 {
        T::one()
    } else {
        x0.scale(1.0 / x0_abs)
    };
    let alpha = -(phase.scale(norm));
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm_sq: f64 = v.iter().map(|t| t.modulus_sqr()).sum();
    if vnorm_sq == 0.0 {
        return (v, 0.0, x0);
    }
    (v, 2.0 / vnorm_sq, alpha)
}

/// Reduces an `m × n` matrix (`m ≥ n`) to a real nonnegative upper
/// bidiagonal form with the same singular values. Returns the diagonal and
/// the superdiagonal stored NR-style: `sup[0] = 0`, `sup[i] = B[i-1][i]`.
fn bidiagonalize<T: Scalar>(mut a: Matrix<T>) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = a.shape();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];

    for k in 0..n {
        // left reflector zeroes a[k+1.., k]
        let col: Vec<T> = (k..m).map(|i| a[(i, k)]).collect();
        let (v, beta, alpha) = householder(&col);
        if beta != 0.0 {
            for j in k + 1..n {
                let mut s = T::zero();
                for (idx, i) in (k..m).enumerate() {
                    s += v[idx].conj() * a[(i, j)];
                }
                let s = s.scale(beta);
                for (idx, i) in (k..m).enumerate() {
                    a[(i, j)] -= v[idx] * s;
                }
            }
            d[k] = alpha;
        } else {
            d[k] = a[(k, k)];
        }

        // right reflector zeroes a[k, k+2..]
        if k + 1 < n {
            let row_conj: Vec<T> = (k + 1..n).map(|j| a[(k, j)].conj()).collect();
            let (v, beta, alpha) = householder(&row_conj);
            if beta != 0.0 {
                for i in k + 1..m {
                    let mut s = T::zero();
                    for (idx, j) in (k + 1..n).enumerate() {
                        s += a[(i, j)] * v[idx];
                    }
                    let s = s.scale(beta);
                    for (idx, j) in (k + 1..n).enumerate() {
                        a[(i, j)] -= s * v[idx].conj();
                    }
                }
                e[k + 1] = alpha.conj();
            } else {
                e[k + 1] = a[(k, k + 1)];
            }
        }
    }

    // Unitary diagonal scalings make every entry real and nonnegative:
    // fix d[k] with a row phase (touches e[k+1]), then e[k+1] with a column
    // phase (touches d[k+1]).
    let mut dr = vec![0.0; n];
    let mut er = vec![0.0; n];
    for k in 0..n {
        let dk = d[k];
        let dabs = dk.modulus();
        dr[k] = dabs;
        if k + 1 < n {
            let mut ek = e[k + 1];
            if dabs != 0.0 {
                ek *= dk.conj().scale(1.0 / dabs);
            }
            let eabs = ek.modulus();
            er[k + 1] = eabs;
            if eabs != 0.0 {
                d[k + 1] *= ek.conj().scale(1.0 / eabs);
            }
        }
    }
    (dr, er)
}

#[inline]
fn pythag(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Golub–Kahan implicit-shift QR on a real upper bidiagonal matrix,
/// singular values only. On return `w` holds the (unsorted, nonnegative)
/// singular values.
fn bidiagonal_qr(w: &mut [f64], rv1: &mut [f64]) -> Result<(), NumericsError> {
    let n = w.len();
    let eps = f64::EPSILON;
    let anorm = w
        .iter()
        .zip(rv1.iter())
        .map(|(a, b)| a.abs() + b.abs())
        .fold(0.0, f64::max);

    for k in (0..n).rev() {
        let mut its = 0;
        loop {
            // test for splitting
            let mut l = k;
            let mut cancel = true;
            loop {
                if l == 0 || rv1[l].abs() <= eps * anorm {
                    cancel = false;
                    break;
                }
                if w[l - 1].abs() <= eps * anorm {
                    break;
                }
                l -= 1;
            }
            if cancel {
                // w[l-1] is negligible: chase rv1[l] out with Givens rotations
                let mut c = 0.0;
                let mut s = 1.0;
                for i in l..=k {
                    let f = s * rv1[i];
                    rv1[i] *= c;
                    if f.abs() <= eps * anorm {
                        break;
                    }
                    let g = w[i];
                    let h = pythag(f, g);
                    w[i] = h;
                    c = g / h;
                    s = -f / h;
                }
            }
            let z = w[k];
            if l == k {
                if z < 0.0 {
                    w[k] = -z;
                }
                break;
            }
            if its >= MAX_SWEEPS_PER_VALUE {
                return Err(NumericsError::SvdConvergence { index: k });
            }
            its += 1;

            // Wilkinson-type shift from the trailing 2x2
            let mut x = w[l];
            let nm = k - 1;
            let mut y = w[nm];
            let mut g = rv1[nm];
            let mut h = rv1[k];
            let mut f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = pythag(f, 1.0);
            f = ((x - z) * (x + z) + h * ((y / (f + g.copysign(f))) - h)) / x;

            let mut c = 1.0;
            let mut s = 1.0;
            for j in l..=nm {
                let i = j + 1;
                g = rv1[i];
                y = w[i];
                h = s * g;
                g *= c;
                let mut zz = pythag(f, h);
                rv1[j] = zz;
                c = f / zz;
                s = h / zz;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                zz = pythag(f, h);
                w[j] = zz;
                if zz != 0.0 {
                    c = f / zz;
                    s = h / zz;
                }
                f = c * g + s * y;
                x = c * y - s * g;
            }
            rv1[l] = 0.0;
            rv1[k] = f;
            w[k] = x;
        }
    }
    Ok(())
}
