// Operating points that are not declared: Newton trim of the reactor for
// a few coolant temperatures, then a linearization at one of them.

use linspect::linearize::{linearize_ct, FdOptions, OperatingPoint};
use linspect::plants::{cstr, find_equilibrium};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = cstr();
    let nominal = plant.nominal().clone();
    for tj in [296.0, 298.0, 300.0] {
        let mut u = nominal.u.clone();
        u[0] = tj;
        match find_equilibrium(&plant, &u, &nominal.x) {
            Ok(x) => println!("T_j = {tj}: C_A = {:.5}, T = {:.4}", x[0], x[1]),
            Err(e) => println!("T_j = {tj}: {e}"),
        }
    }

    let op = OperatingPoint::trimmed(
        &plant,
        nominal.u.clone(),
        &[nominal.x[0] + 0.2, nominal.x[1] - 1.0],
    )?;
    let lin = linearize_ct(&plant, &op, &FdOptions::default())?;
    println!(
        "source {}, residual {:e}",
        lin.metadata.operating_point.source, lin.metadata.residual_norm
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
