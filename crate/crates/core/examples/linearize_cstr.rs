// Both linearization paths on the unstable tank reactor, saved as model
// files that the `linspect` binary can read back.

use linspect::linearize::{linearize_ct, linearize_dt, FdOptions, OperatingPoint};
use linspect::plants::cstr;
use linspect::statespace::{suggest_sampling_time, ModelDocument};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let plant = cstr();
    let op = OperatingPoint::nominal(&plant);
    let fd = FdOptions::default();

    let ct = linearize_ct(&plant, &op, &fd)?;
    println!("A = {:?}", ct.model.sys.a.to_rows());
    println!("B = {:?}", ct.model.sys.b.to_rows());
    println!("eigenvalues {:?}", ct.model.eigenvalues()?);
    println!("residual norm {:e}", ct.metadata.residual_norm);

    let ts = suggest_sampling_time(&ct.model)?.rounded;
    let dt = linearize_dt(&plant, &op, ts, &fd)?;
    println!("flow-map A at ts = {ts} h: {:?}", dt.model.sys.a.to_rows());

    let dir = std::env::temp_dir().join("linspect-examples");
    std::fs::create_dir_all(&dir)?;
    for (name, doc) in [
        ("cstr_ct.json", ct.to_document()),
        ("cstr_dt.json", dt.to_document()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, doc.to_json())?;
        let back = ModelDocument::read(&path)?;
        assert_eq!(back, doc);
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
