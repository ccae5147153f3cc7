// Condition number and numerical rank of the transfer function matrix
// across frequency, with both rank tolerance modes.

use linspect::diagnostics::{condition_sweep, RankTolerance};
use linspect::linearize::{linearize_ct, FdOptions, OperatingPoint};
use linspect::plants::rsr;
use linspect::statespace::{FrequencyGrid, LinearModel};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = rsr();
    let model: LinearModel = linearize_ct(
        &plant,
        &OperatingPoint::nominal(&plant),
        &FdOptions::default(),
    )?
    .model
    .into();
    let grid = FrequencyGrid::logspace(1e-3, 1e4, 71)?;

    for tol in [RankTolerance::Default, RankTolerance::Absolute(1e-3)] {
        let sweep = condition_sweep(&model, &grid, tol)?;
        println!(
            "{tol:?}: max gamma {:.4e}, rank {}..{}, changes at {:?}",
            sweep.max_gamma().unwrap_or(f64::NAN),
            sweep.min_rank().unwrap_or(0),
            sweep.max_rank().unwrap_or(0),
            sweep.rank_changes()
        );
    }
    let sweep = condition_sweep(&model, &grid, RankTolerance::Default)?;
    for p in sweep.points.iter().step_by(10) {
        println!(
            "omega {:>10.3e}  gamma {:>10.4e}  rank {:?}",
            p.omega,
            p.gamma.unwrap_or(f64::NAN),
            p.rank
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
