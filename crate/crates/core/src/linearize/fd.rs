use crate::numerics::RealMatrix;
use std::fmt::Display;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdScheme {
    Central,
    Forward,
}

/// Perturbation rule `h_j = max(step_factor · |x_j|, floor)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdOptions {
    pub step_factor: f64,
    pub floor: f64,
    pub scheme: FdScheme,
}

impl Default for FdOptions {
    /// Central differences with `ε^(1/3)`, which balances truncation
    /// against roundoff for a second-order formula.
    fn default() -> Self {
        let h = f64::EPSILON.cbrt();
        Self {
            step_factor: h,
            floor: h,
            scheme: FdScheme::Central,
        }
    }
}

impl FdOptions {
    pub fn forward() -> Self {
        let h = f64::EPSILON.sqrt();
        Self {
            step_factor: h,
            floor: h,
            scheme: FdScheme::Forward,
        }
    }

    fn validate(&self) -> Result<(), FdError> {
        if !(self.step_factor.is_finite() && self.step_factor > 0.0)
            || !(self.floor.is_finite() && self.floor > 0.0)
        {
            return Err(FdError::Options(format!(
                "step factor and floor must be positive, got {} and {}",
                self.step_factor, self.floor
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FdError {
    #[error("evaluation failed while perturbing column {column}: {message}")]
    Evaluation { column: usize, message: String },
    #[error("map returned a non-finite value while perturbing column {column}")]
    NonFinite { column: usize },
    #[error("map returned {got} values, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("invalid finite-difference options: {0}")]
    Options(String),
}

/// Finite-difference Jacobian of a fallible map `g: ℝⁿ → ℝᵖ` at `x`.
///
/// The step actually used is `(x_j + h) − x_j`, which is exactly
/// representable and removes one source of roundoff from the quotient.
pub fn try_fd_jacobian<F, E>(mut g: F, x: &[f64], opts: &FdOptions) -> Result<RealMatrix, FdError>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
    E: Display,
{
    opts.validate()?;
    let n = x.len();
    if n == 0 {
        return Err(FdError::Shape {
            expected: 1,
            got: 0,
        });
    }
    let mut call =
        |z: &[f64], column: usize, expected: Option<usize>| -> Result<Vec<f64>, FdError> {
            let v = g(z).map_err(|e| FdError::Evaluation {
                column,
                message: e.to_string(),
            })?;
            if let Some(p) = expected {
                if v.len() != p {
                    return Err(FdError::Shape {
                        expected: p,
                        got: v.len(),
                    });
                }
            }
            if v.iter().any(|e| !e.is_finite()) {
                return Err(FdError::NonFinite { column });
            }
            Ok(v)
        };
    let base = match opts.scheme {
        FdScheme::Forward => Some(call(x, 0, None)?),
        FdScheme::Central => None,
    };
    let mut p = base.as_ref().map(|b| b.len());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut z = x.to_vec();
    for j in 0..n {
        let h = (opts.step_factor * x[j].abs()).max(opts.floor);
        let col = match &base {
            Some(f0) => {
                z[j] = x[j] + h;
                let dh = z[j] - x[j];
                let fp = call(&z, j, p)?;
                fp.iter().zip(f0).map(|(a, b)| (a - b) / dh).collect()
            }
            None => {
                z[j] = x[j] + h;
                let up = z[j];
                let fp = call(&z, j, p)?;
                p = Some(fp.len());
                z[j] = x[j] - h;
                let dh = up - z[j];
                let fm = call(&z, j, p)?;
                fp.iter()
                    .zip(&fm)
                    .map(|(a, b)| (a - b) / dh)
                    .collect::<Vec<f64>>()
            }
        };
        z[j] = x[j];
        if col.iter().any(|v: &f64| !v.is_finite()) {
            return Err(FdError::NonFinite { column: j });
        }
        columns.push(col);
    }
    let p = p.unwrap_or(0);
    if p == 0 {
        return Err(FdError::Shape {
            expected: 1,
            got: 0,
        });
    }
    let mut data = vec![0.0; p * n];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * n + j] = *v;
        }
    }
    Ok(RealMatrix::new(p, n, data).expect("finite entries checked"))
}

/// Finite-difference Jacobian of an infallible map.
pub fn fd_jacobian(
    mut g: impl FnMut(&[f64]) -> Vec<f64>,
    x: &[f64],
    opts: &FdOptions,
) -> Result<RealMatrix, FdError> {
    try_fd_jacobian(|z| Ok::<_, std::convert::Infallible>(g(z)), x, opts)
}
