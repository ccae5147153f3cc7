use linspect::numerics::RealMatrix;
use linspect::statespace::{
    ContinuousLinearModel, DiscreteLinearModel, LinearModel, ModelDocument,
};
use nalgebra::DMatrix;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn linspect(args: &[&str], dir: &Path) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_linspect"))
        .args(args)
        .current_dir(dir)
        .env_remove("LINSPECT_OUT_DIR")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn ok(args: &[&str], dir: &Path) -> Run {
    let r = linspect(args, dir);
    assert_eq!(
        r.code, 0,
        "{args:?}\nstdout:\n{}\nstderr:\n{}",
        r.stdout, r.stderr
    );
    r
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn write_model(dir: &Path, name: &str, model: LinearModel) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, ModelDocument::from_model(&model, None).to_json()).unwrap();
    path
}

fn load(path: &Path) -> ModelDocument {
    ModelDocument::read(path).unwrap()
}

fn round_down_one_digit(x: f64) -> f64 {
    let p = 10f64.powf(x.log10().floor());
    (x / p).floor() * p
}

#[test]
fn linearize_both_with_auto_sampling_time() {
    let tmp = tempfile::tempdir().unwrap();
    let r = ok(
        &[
            "linearize",
            "--plant",
            "cstr",
            "--both",
            "--ts",
            "auto",
            "--out-dir",
            "out",
        ],
        tmp.path(),
    );
    assert!(r.stdout.contains("raw") && r.stdout.contains("rounded"));

    let ct = load(&tmp.path().join("out/model_ct.json"));
    let dt = load(&tmp.path().join("out/model_dt.json"));
    let (n, _) = ct.a.shape();
    let a = DMatrix::from_row_slice(n, n, ct.a.as_slice());
    let max_mod = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let expected = round_down_one_digit(1.0 / (2.0 * max_mod));
    let ts = dt.ts.unwrap();
    assert!(
        (ts - expected).abs() <= 1e-12 * expected,
        "ts {ts} vs {expected}"
    );
    assert_eq!(dt.metadata.unwrap().ts, Some(ts));
}

#[test]
fn linear_demo_round_trips_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &[
            "linearize",
            "--plant",
            "linear-demo",
            "--ct",
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    assert!(!tmp.path().join("model_dt.json").exists());
    let doc = load(&tmp.path().join("model_ct.json"));
    let want = [
        RealMatrix::from_rows(&[[-1.0, 0.5, 0.0], [0.2, -2.0, 1.0], [0.0, 0.4, -2.5]]).unwrap(),
        RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap(),
        RealMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0, 0.0], [0.1, 0.0]]).unwrap(),
    ];
    for (got, want) in [&doc.a, &doc.b, &doc.c, &doc.d].into_iter().zip(&want) {
        assert!(got.sub(want).unwrap().max_abs() < 1e-8);
    }
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let r = linspect(&["linearize", "--plant", "boiler"], tmp.path());
    assert_eq!(r.code, 2);
    for name in ["linear-demo", "cstr", "rsr"] {
        assert!(r.stderr.contains(name), "{}", r.stderr);
    }
    assert_eq!(
        linspect(&["eig", "--model", "missing.json"], tmp.path()).code,
        2
    );
    std::fs::write(tmp.path().join("junk.json"), "{not json").unwrap();
    assert_eq!(
        linspect(&["sweep", "--model", "junk.json"], tmp.path()).code,
        2
    );
    assert_eq!(
        linspect(&["linearize", "--plant", "cstr", "--dt"], tmp.path()).code,
        2
    );
    assert_eq!(linspect(&["bogus"], tmp.path()).code, 2);
    assert_eq!(linspect(&["--help"], tmp.path()).code, 0);
}

#[test]
fn eigen_table_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let a = RealMatrix::from_diag(&[5.0, 5.0, 5.0]).unwrap();
    let m = ContinuousLinearModel::new(
        a,
        RealMatrix::zeros(3, 1),
        RealMatrix::zeros(1, 3),
        RealMatrix::zeros(1, 1),
    )
    .unwrap();
    write_model(tmp.path(), "triple.json", LinearModel::Continuous(m));
    ok(
        &["eig", "--model", "triple.json", "--out-dir", "."],
        tmp.path(),
    );
    let (header, rows) = read_csv(&tmp.path().join("triple_eigen.csv"));
    assert_eq!(
        header,
        [
            "cluster",
            "re",
            "im",
            "multiplicity",
            "modulus",
            "classes",
            "lhp",
            "imag"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 5.0);
    assert_eq!(rows[0][3], "3");
    assert_eq!(rows[0][5], "unstable");
    let json: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("triple_eigen.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["clusters"][0]["multiplicity"], 3);
}

fn sweep_rows(dir: &Path, file: &str) -> Vec<Vec<String>> {
    let (header, rows) = read_csv(&dir.join(file));
    assert_eq!(
        header,
        [
            "omega_rad_per_h",
            "sigma_max",
            "sigma_min",
            "gamma",
            "rank",
            "gap"
        ]
    );
    rows
}

#[test]
fn sweep_fixtures() {
    let tmp = tempfile::tempdir().unwrap();
    let ident = ContinuousLinearModel::new(
        RealMatrix::from_rows(&[[-1.0]]).unwrap(),
        RealMatrix::zeros(1, 2),
        RealMatrix::zeros(2, 1),
        RealMatrix::identity(2),
    )
    .unwrap();
    write_model(tmp.path(), "ident.json", LinearModel::Continuous(ident));
    ok(
        &["sweep", "--model", "ident.json", "--out-dir", "."],
        tmp.path(),
    );
    let rows = sweep_rows(tmp.path(), "ident_condition_sweep.csv");
    assert_eq!(rows.len(), 200);
    for r in &rows {
        assert!((r[3].parse::<f64>().unwrap() - 1.0).abs() <= 1e-12);
        assert_eq!(r[4], "2");
    }
    assert_eq!(
        std::fs::read(tmp.path().join("ident_condition_sweep.csv")).unwrap(),
        std::fs::read(tmp.path().join("ident_rank_sweep.csv")).unwrap()
    );

    // diag(1, 1/(s+1))
    let lag = ContinuousLinearModel::new(
        RealMatrix::from_rows(&[[-1.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0, 1.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0], [1.0]]).unwrap(),
        RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap(),
    )
    .unwrap();
    write_model(tmp.path(), "lag.json", LinearModel::Continuous(lag));
    ok(
        &[
            "sweep",
            "--model",
            "lag.json",
            "--mode",
            "condition",
            "--grid-min",
            "0.01",
            "--grid-max",
            "100",
            "--grid-points",
            "5",
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    assert!(!tmp.path().join("lag_rank_sweep.csv").exists());
    let rows = sweep_rows(tmp.path(), "lag_condition_sweep.csv");
    let at_one = rows
        .iter()
        .find(|r| (r[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12)
        .expect("grid contains omega = 1");
    assert!((at_one[3].parse::<f64>().unwrap() - 2f64.sqrt()).abs() <= 1e-10);
    for r in &rows {
        assert!(r[3].parse::<f64>().unwrap() >= 1.0);
        assert!(r[4].parse::<usize>().unwrap() <= 2);
    }
}

#[test]
fn discrete_sweep_is_clipped_with_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let ts = 0.1;
    let m = DiscreteLinearModel::new(
        RealMatrix::from_rows(&[[0.5]]).unwrap(),
        RealMatrix::from_rows(&[[1.0]]).unwrap(),
        RealMatrix::from_rows(&[[1.0]]).unwrap(),
        RealMatrix::zeros(1, 1),
        ts,
    )
    .unwrap();
    write_model(tmp.path(), "disc.json", LinearModel::Discrete(m));
    let r = linspect(
        &[
            "sweep",
            "--model",
            "disc.json",
            "--mode",
            "rank",
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert!(r.stderr.contains("Nyquist"));
    let rows = sweep_rows(tmp.path(), "disc_rank_sweep.csv");
    let nyquist = std::f64::consts::PI / ts;
    assert!(!rows.is_empty() && rows.len() < 200);
    assert!(rows.iter().all(|r| r[0].parse::<f64>().unwrap() <= nyquist));
}

#[test]
fn undamped_pole_leaves_a_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let m = ContinuousLinearModel::new(
        RealMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0], [1.0]]).unwrap(),
        RealMatrix::from_rows(&[[1.0, 0.0]]).unwrap(),
        RealMatrix::zeros(1, 1),
    )
    .unwrap();
    write_model(tmp.path(), "osc.json", LinearModel::Continuous(m));
    let r = linspect(
        &[
            "sweep",
            "--model",
            "osc.json",
            "--grid-min",
            "0.1",
            "--grid-max",
            "10",
            "--grid-points",
            "3",
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    assert_eq!(r.code, 4);
    let rows = sweep_rows(tmp.path(), "osc_condition_sweep.csv");
    assert_eq!(rows[1][5], "1");
    assert_eq!(rows[1][4], "");
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn compare_is_deterministic_and_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &[
            "linearize",
            "--plant",
            "cstr",
            "--both",
            "--ts",
            "0.05",
            "--out-dir",
            "models",
        ],
        tmp.path(),
    );
    let args = |out: &'static str| {
        vec![
            "compare",
            "--model",
            "models/model_ct.json",
            "--model",
            "models/model_dt.json",
            "--duration",
            "0.5",
            "--seed",
            "11",
            "--repeats",
            "2",
            "--step-input",
            "0",
            "--step-delta",
            "1.0",
            "--out-dir",
            out,
        ]
    };
    ok(&args("run1"), tmp.path());
    ok(&args("run2"), tmp.path());
    let first = dir_bytes(&tmp.path().join("run1"));
    assert_eq!(
        first.iter().map(|f| f.0.as_str()).collect::<Vec<_>>(),
        ["compare.csv", "compare.json", "compare_errorbars.csv"]
    );
    assert_eq!(first, dir_bytes(&tmp.path().join("run2")));

    let (header, rows) = read_csv(&tmp.path().join("run1/compare.csv"));
    assert_eq!(
        header,
        [
            "channel",
            "nominal",
            "eq1_percent",
            "eq2_model_ct",
            "eq2_model_dt"
        ]
    );
    assert_eq!(rows.len(), 2);
    let (header, _) = read_csv(&tmp.path().join("run1/compare_errorbars.csv"));
    assert_eq!(
        header,
        ["model", "channel", "center_eq1_percent", "half_width_eq2"]
    );

    let json: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run1/compare.json")).unwrap(),
    )
    .unwrap();
    let agg = |i: usize| json["models"][i]["profile"]["aggregate"].as_f64().unwrap();
    let ratio = json["ratios"][0]["value"].as_f64().unwrap();
    assert_eq!(ratio, agg(0) / agg(1));
    // the aggregate is the sum of the emitted per-channel values
    let sum: f64 = rows
        .iter()
        .map(|r| r[3].parse::<f64>().unwrap().abs())
        .sum();
    assert!((sum - agg(0)).abs() <= 1e-12 * agg(0).max(1.0));
}

#[test]
fn exact_model_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["linearize", "--plant", "linear-demo", "--out-dir", "."],
        tmp.path(),
    );
    ok(
        &[
            "compare",
            "--model",
            "model_ct.json",
            "--no-noise",
            "--step-input",
            "1",
            "--step-delta",
            "0.5",
            "--step-at",
            "0.2",
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("compare.json")).unwrap())
            .unwrap();
    assert!(json["models"][0]["profile"]["aggregate"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn early_shutdown_is_insufficient_data() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["linearize", "--plant", "rsr", "--out-dir", "."],
        tmp.path(),
    );
    let r = linspect(
        &[
            "compare",
            "--model",
            "model_ct.json",
            "--step-input",
            "1",
            "--step-delta",
            "200",
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("comparison"));
}

#[test]
fn simulate_writes_trace_and_honours_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("run.json"),
        r#"{"plant": "rsr", "out_dir": "from_config", "scenario": {"duration": 0.5, "seed": 3}}"#,
    )
    .unwrap();
    ok(
        &["simulate", "--config", "run.json", "--duration", "1.0"],
        tmp.path(),
    );
    let side: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("from_config/trace.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(side["duration"].as_f64(), Some(1.0));
    assert_eq!(side["seed"].as_u64(), Some(3));
    let (header, rows) = read_csv(&tmp.path().join("from_config/trace_0.25h.csv"));
    assert_eq!(header, ["time_h", "CB_s"]);
    assert_eq!(rows.len(), 5);

    let out = Command::new(env!("CARGO_BIN_EXE_linspect"))
        .args(["simulate", "--config", "run.json"])
        .current_dir(tmp.path())
        .env("LINSPECT_OUT_DIR", "from_env")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("from_env/trace.json").exists());
}

#[test]
fn simulate_reports_shutdown_and_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let r = linspect(
        &[
            "simulate",
            "--plant",
            "rsr",
            "--step-input",
            "1",
            "--step-delta",
            "100",
            "--no-noise",
        ],
        tmp.path(),
    );
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("shutdown"));
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("trace.json")).unwrap())
            .unwrap();
    assert_eq!(side["termination"]["status"], "shutdown");

    let r = linspect(
        &[
            "simulate",
            "--plant",
            "linear-demo",
            "--step",
            "10",
            "--duration",
            "10000",
        ],
        tmp.path(),
    );
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("t = "), "{}", r.stderr);
}
