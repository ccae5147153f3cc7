// Bringing your own simulator: any type implementing `PlantDynamics` can be
// trimmed, linearized, simulated and audited like the bundled plants.

use linspect::diagnostics::{condition_sweep, eigen_report, EigenTolerances, RankTolerance};
use linspect::linearize::{linearize_ct, FdOptions, OperatingPoint};
use linspect::plants::{Monitored, PlantDescriptor, PlantDynamics};
use linspect::statespace::{ChannelLabels, FrequencyGrid, LinearModel};
use std::error::Error;

/// Two tanks in series draining through orifices, each with its own inflow.
struct Tanks {
    area: f64,
    k: f64,
}

impl PlantDynamics for Tanks {
    fn n_states(&self) -> usize {
        2
    }
    fn n_inputs(&self) -> usize {
        2
    }
    fn n_outputs(&self) -> usize {
        2
    }
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let q1 = self.k * x[0].max(0.0).sqrt();
        let q2 = self.k * x[1].max(0.0).sqrt();
        dx[0] = (u[0] - q1) / self.area;
        dx[1] = (q1 + u[1] - q2) / self.area;
    }
    fn output(&self, x: &[f64], _u: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let tanks = Tanks { area: 2.0, k: 0.5 };
    // levels where an inflow of 1.0 into the first tank balances k·√h
    let h = (1.0 / tanks.k).powi(2);
    let plant = PlantDescriptor::builder("tanks", tanks, vec![h, h], vec![1.0, 0.0])
        .labels(ChannelLabels {
            states: vec!["h1".into(), "h2".into()],
            inputs: vec!["q1_in".into(), "q2_in".into()],
            outputs: vec!["h1".into(), "h2".into()],
        })
        .noise_std(vec![0.01, 0.01])
        .constraint(Monitored::Output(1), 0.0, 10.0)
        .build()?;

    let lin = linearize_ct(
        &plant,
        &OperatingPoint::nominal(&plant),
        &FdOptions::default(),
    )?;
    let model: LinearModel = lin.model.into();
    let report = eigen_report(&model, EigenTolerances::continuous())?;
    for c in &report.clusters {
        println!("lambda {:.5} x{} ({})", c.value, c.multiplicity, c.classes);
    }
    let sweep = condition_sweep(
        &model,
        &FrequencyGrid::logspace(1e-2, 1e2, 5)?,
        RankTolerance::Default,
    )?;
    for p in &sweep.points {
        println!(
            "omega {:>7.2}  rank {:?}  gamma {:?}",
            p.omega, p.rank, p.gamma
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
