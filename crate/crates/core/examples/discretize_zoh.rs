// Zero-order-hold discretization of a continuous model, the sampling-time
// rule, and the two frequency responses side by side.

use linspect::linearize::{linearize_ct, FdOptions, OperatingPoint};
use linspect::plants::linear_demo;
use linspect::statespace::{c2d_zoh, suggest_sampling_time};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = linear_demo();
    let ct = linearize_ct(
        &plant,
        &OperatingPoint::nominal(&plant),
        &FdOptions::default(),
    )?
    .model;

    let s = suggest_sampling_time(&ct)?;
    println!(
        "max |lambda| {:.4}, raw ts {:.4} h, rounded {} h",
        s.max_modulus, s.raw, s.rounded
    );

    let dt = c2d_zoh(&ct, s.rounded)?;
    for (l, z) in ct.eigenvalues()?.iter().zip(dt.eigenvalues()?) {
        println!("lambda {l:.4}  ->  z {z:.4}");
    }
    for w in [0.01, 0.1, 1.0] {
        let gc = ct.frequency_response(w)?;
        let gd = dt.frequency_response(w)?;
        println!(
            "omega {w}: |G_ct[0,0]| {:.5}  |G_dt[0,0]| {:.5}",
            gc[(0, 0)].norm(),
            gd[(0, 0)].norm()
        );
    }
    println!("nyquist {:.3} rad/h", dt.nyquist());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
