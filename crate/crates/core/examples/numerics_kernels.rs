// The dense kernels on their own: eigenvalues, singular values, the
// matrix exponential and a pivoted solve.

use linspect::numerics::{eigenvalues, expm, singular_values, solve, RealMatrix};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // companion matrix of (s + 1)(s + 2)(s + 3)
    let a = RealMatrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-6.0, -11.0, -6.0]])?;
    let mut eig = eigenvalues(&a)?;
    eig.sort_by(|p, q| p.re.total_cmp(&q.re));
    println!("eigenvalues: {eig:?}");

    let rot = RealMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]])?;
    let e = expm(&rot.scaled(std::f64::consts::FRAC_PI_2))?;
    println!("exp of a quarter turn: {:?}", e.to_rows());

    let tall = RealMatrix::from_rows(&[[3.0, 0.0], [4.0, 5.0], [0.0, 0.0]])?;
    println!("singular values: {:?}", singular_values(&tall)?);

    let rhs = RealMatrix::column_vector(&[1.0, 0.0, 0.0])?;
    let x = solve(&a, &rhs)?;
    println!("A \\ e1 = {:?}", x.as_slice());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
