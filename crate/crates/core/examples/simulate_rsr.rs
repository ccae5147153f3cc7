// One noisy hour of the reactor/separator plant with mixed sampling, then
// a coolant step large enough to trip the temperature limit.

use linspect::plants::{rsr, simulate, write_trace, InputSchedule, SimOptions};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = rsr();
    let x0 = plant.nominal().x.clone();
    let steady = InputSchedule::constant(plant.nominal().u.clone())?;
    let trace = simulate(&plant, &steady, &x0, &SimOptions::new(1.0, 42))?;
    for c in &trace.channels {
        let mean = c.values.iter().sum::<f64>() / c.len() as f64;
        println!(
            "{:>5} every {:>5} h: {:>6} samples, mean {mean:.4}",
            c.label,
            c.period,
            c.len()
        );
    }

    let dir = std::env::temp_dir().join("linspect-examples");
    let side = write_trace(&trace, &dir, "rsr_hour")?;
    for g in &side.groups {
        println!("wrote {}", dir.join(&g.file).display());
    }

    let hot = InputSchedule::step(plant.nominal().u.clone(), 1, 60.0, 0.1)?;
    let run = simulate(&plant, &hot, &x0, &SimOptions::new(1.0, 42).without_noise())?;
    println!("after a +60 K coolant step: {:?}", run.termination);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
