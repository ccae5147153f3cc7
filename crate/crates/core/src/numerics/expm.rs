use super::lu::solve;
use super::matrix::RealMatrix;
use super::NumericsError;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant meets double precision
/// without scaling.
const THETA13: f64 = 5.371920351148152;

fn axpy_sum(terms: &[(f64, &RealMatrix)], n: usize) -> RealMatrix {
    let mut out = RealMatrix::zeros(n, n);
    for (coef, m) in terms {
        for (o, v) in out.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *o += coef * v;
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with the diagonal degree-13
/// Padé approximant. The scaling power is chosen from the 1-norm.
pub fn expm(m: &RealMatrix) -> Result<RealMatrix, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let norm = m.norm1();
    if norm == 0.0 {
        return Ok(RealMatrix::identity(n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = m.scaled(2f64.powi(-squarings));
    let b = &PADE13;
    let ident = RealMatrix::identity(n);
    let a2 = a.matmul(&a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let inner_u = a6.matmul(&axpy_sum(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n))?;
    let u_poly = axpy_sum(
        &[
            (1.0, &inner_u),
            (b[7], &a6),
            (b[5], &a4),
            (b[3], &a2),
            (b[1], &ident),
        ],
        n,
    );
    let u = a.matmul(&u_poly)?;
    let inner_v = a6.matmul(&axpy_sum(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n))?;
    let v = axpy_sum(
        &[
            (1.0, &inner_v),
            (b[6], &a6),
            (b[4], &a4),
            (b[2], &a2),
            (b[0], &ident),
        ],
        n,
    );

    let denom = v.sub(&u)?;
    let numer = v.add(&u)?;
    let mut r = solve(&denom, &numer)?;
    for _ in 0..squarings {
        r = r.matmul(&r)?;
        if !r.all_finite() {
            return Err(NumericsError::Overflow);
        }
    }
    if !r.all_finite() {
        return Err(NumericsError::Overflow);
    }
    Ok(r)
}
