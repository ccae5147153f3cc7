// Eigenvalue tables for the continuous and discrete linearizations of the
// reactor/separator plant.

use linspect::diagnostics::{eigen_report, EigenTolerances};
use linspect::linearize::{linearize_ct, linearize_dt, FdOptions, OperatingPoint};
use linspect::plants::rsr;
use linspect::statespace::LinearModel;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = rsr();
    let op = OperatingPoint::nominal(&plant);
    let ct: LinearModel = linearize_ct(&plant, &op, &FdOptions::default())?
        .model
        .into();
    let dt: LinearModel = linearize_dt(&plant, &op, 0.01, &FdOptions::default())?
        .model
        .into();

    for model in [&ct, &dt] {
        let report = eigen_report(model, EigenTolerances::for_kind(model.kind()))?;
        println!("{} model", model.kind());
        for (i, c) in report.clusters.iter().enumerate() {
            println!(
                "  e{:<2} {:>12.5} {:>+10.5}i  x{}  |.| {:>9.5}  {}",
                i + 1,
                c.value.re,
                c.value.im,
                c.multiplicity,
                c.modulus,
                c.classes
            );
        }
        println!(
            "  unstable: {}, integrators: {}",
            report.count(|c| c.unstable),
            report.count(|c| c.integrator)
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
