use super::{PlantDescriptor, PlantError};
use crate::linearize::{try_fd_jacobian, FdOptions};
use crate::numerics::{solve, NumericsError, RealMatrix};

/// Infinity-norm residual accepted as an equilibrium.
pub const TRIM_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `f(x, u) = 0` for `x` by damped Newton iteration with a
/// finite-difference Jacobian, starting from `x_guess`.
pub fn find_equilibrium(
    plant: &PlantDescriptor,
    u: &[f64],
    x_guess: &[f64],
) -> Result<Vec<f64>, PlantError> {
    let n = plant.n_states();
    if u.len() != plant.n_inputs() || x_guess.len() != n {
        return Err(PlantError::Options(
            "trim guess or input has the wrong size".into(),
        ));
    }
    let f = plant.dynamics();
    let eval = |x: &[f64]| f.eval_derivative(x, u);
    let mut x = x_guess.to_vec();
    let mut r = eval(&x);
    let mut norm = inf_norm(&r);
    if !norm.is_finite() {
        return Err(PlantError::TrimFailure {
            best_residual: norm,
        });
    }
    let opts = FdOptions::default();
    for _ in 0..MAX_ITERATIONS {
        if norm <= TRIM_TOLERANCE {
            return Ok(x);
        }
        let jac = try_fd_jacobian(|z: &[f64]| Ok::<_, String>(eval(z)), &x, &opts)?;
        let rhs = RealMatrix::new(n, 1, r.iter().map(|v| -v).collect()).expect("finite residual");
        let dx = match solve(&jac, &rhs) {
            Ok(d) => d,
            Err(NumericsError::Singular { column }) => {
                return Err(PlantError::SingularJacobian { column })
            }
            Err(_) => {
                return Err(PlantError::TrimFailure {
                    best_residual: norm,
                })
            }
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x
                .iter()
                .zip(dx.as_slice())
                .map(|(xi, di)| xi + lambda * di)
                .collect();
            let rt = eval(&trial);
            let nt = inf_norm(&rt);
            if nt.is_finite() && nt < norm {
                x = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm <= TRIM_TOLERANCE {
        Ok(x)
    } else {
        Err(PlantError::TrimFailure {
            best_residual: norm,
        })
    }
}
