// Continuous, fine discrete and coarse discrete models of the tank
// reactor, each measured against the nonlinear plant after a feed step.

use linspect::diagnostics::{compare_linearizations, CandidateModel, Scenario};
use linspect::linearize::{linearize_ct, linearize_dt, FdOptions, OperatingPoint};
use linspect::plants::{cstr, InputSchedule};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = cstr();
    let op = OperatingPoint::nominal(&plant);
    let fd = FdOptions::default();
    let candidates = vec![
        CandidateModel::from_linearization("ct", &linearize_ct(&plant, &op, &fd)?),
        CandidateModel::from_linearization("dt_0.05", &linearize_dt(&plant, &op, 0.05, &fd)?),
        CandidateModel::from_linearization("dt_0.5", &linearize_dt(&plant, &op, 0.5, &fd)?),
    ];

    let schedule = InputSchedule::step(op.u.clone(), 0, -0.5, 0.1)?;
    let mut scenario = Scenario::new(schedule, 1.0, 7);
    scenario.repeats = 3;
    let report = compare_linearizations(&plant, &op, &candidates, &scenario)?;

    println!("nonlinear eq1 (%): {:?}", report.nonlinear.values);
    for m in &report.models {
        println!(
            "{:>8}: eq2 {:?}, aggregate {:.4e}",
            m.name, m.profile.values, m.profile.aggregate
        );
    }
    for r in &report.ratios {
        println!("{} / {} = {:?}", r.numerator, r.denominator, r.value);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
