use super::config::{parse_rank_tol, PointChoice, RunConfig, ScenarioConfig, TsSpec};
use super::{
    CliError, CommonArgs, CompareArgs, EigArgs, LinearizeArgs, OpArg, Outcome, ScenarioArgs,
    SimulateArgs, SweepArgs, SweepMode,
};
use crate::diagnostics::{
    compare_linearizations, condition_sweep, eigen_report, CandidateModel, CompareReport,
    DiagnosticsError, EigenReport, EigenTolerances, FrequencySweep, RankTolerance, Scenario,
};
use crate::linearize::{
    linearize_ct, linearize_dt, FdError, FdOptions, LinearizeError, OperatingPoint,
};
use crate::plants::{
    plant_by_name, simulate as run_plant, write_trace, InputSchedule, PlantDescriptor, PlantError,
    SimOptions, Termination, DEFAULT_STEP, PLANT_NAMES,
};
use crate::statespace::{
    suggest_sampling_time, FrequencyGrid, LinearModel, ModelDocument, ModelMetadata,
};
use crate::util::{csv_text, fmt_csv, fmt_short, write_atomic};
use serde::Serialize;
use std::path::{Path, PathBuf};

const DEFAULT_DURATION: f64 = 1.0;
const GRID_MIN: f64 = 1e-4;
const GRID_MAX: f64 = 1e4;
const GRID_POINTS: usize = 200;

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn plant_named(name: Option<&str>) -> Result<PlantDescriptor, CliError> {
    let catalog = PLANT_NAMES.join(", ");
    let name =
        name.ok_or_else(|| CliError::Config(format!("no plant given; available: {catalog}")))?;
    plant_by_name(name)
        .ok_or_else(|| CliError::Config(format!("unknown plant {name:?}; available: {catalog}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn opt_csv(x: Option<f64>) -> String {
    x.map(fmt_csv).unwrap_or_default()
}

struct LoadedModel {
    stem: String,
    model: LinearModel,
    metadata: Option<ModelMetadata>,
}

fn read_model(path: &Path) -> Result<LoadedModel, CliError> {
    let bad = |e: &dyn std::fmt::Display| {
        CliError::Config(format!("cannot load model {}: {e}", path.display()))
    };
    let doc = ModelDocument::read(path).map_err(|e| bad(&e))?;
    let model = doc.to_model().map_err(|e| bad(&e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    Ok(LoadedModel {
        stem,
        model,
        metadata: doc.metadata,
    })
}

fn model_path(flag: &Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| cfg.model.clone())
        .ok_or_else(|| CliError::Config("no model file given (--model)".into()))
}

fn linearize_error(stage: &'static str, e: LinearizeError) -> CliError {
    match e {
        LinearizeError::OperatingPoint(_) | LinearizeError::Fd(FdError::Options(_)) => {
            CliError::Config(format!("{stage}: {e}"))
        }
        other => CliError::numerical(stage, other),
    }
}

fn plant_error(stage: &'static str, e: PlantError) -> CliError {
    match e {
        PlantError::Invalid(_)
        | PlantError::Schedule(_)
        | PlantError::Options(_)
        | PlantError::Io(_) => CliError::Config(format!("{stage}: {e}")),
        other => CliError::numerical(stage, other),
    }
}

fn diagnostics_error(stage: &'static str, e: DiagnosticsError) -> CliError {
    match e {
        DiagnosticsError::Plant(p) => plant_error(stage, p),
        DiagnosticsError::Contract(_)
        | DiagnosticsError::Parameter(_)
        | DiagnosticsError::Comparison(_)
        | DiagnosticsError::StateSpace(_) => CliError::Config(format!("{stage}: {e}")),
        other => CliError::numerical(stage, other),
    }
}

fn print_eigen_summary(report: &EigenReport) {
    let max_mod = report
        .clusters
        .iter()
        .map(|c| c.modulus)
        .fold(0.0, f64::max);
    println!(
        "  {} eigenvalues in {} clusters: {} unstable, {} integrator, {} oscillatory; max |lambda| {}",
        report.total_multiplicity(),
        report.clusters.len(),
        report.count(|c| c.unstable),
        report.count(|c| c.integrator),
        report.count(|c| c.oscillatory),
        fmt_short(max_mod)
    );
}

fn fd_options(a: &LinearizeArgs, cfg: &RunConfig) -> FdOptions {
    let d = FdOptions::default();
    FdOptions {
        step_factor: a
            .step_factor
            .or(cfg.fd.step_factor)
            .unwrap_or(d.step_factor),
        floor: a.step_floor.or(cfg.fd.floor).unwrap_or(d.floor),
        ..d
    }
}

pub fn linearize(a: LinearizeArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&a.common)?;
    let out = cfg.out_dir(a.common.out_dir.as_deref());
    let plant = plant_named(a.plant.as_deref().or(cfg.plant.as_deref()))?;
    let ts = match a.ts.as_deref() {
        Some(s) => Some(TsSpec::parse(s)?),
        None => cfg.ts,
    };
    let (want_ct, want_dt) = match (a.ct, a.dt, a.both) {
        (_, _, true) => (true, true),
        (true, _, _) => (true, false),
        (_, true, _) => (false, true),
        _ => (true, ts.is_some()),
    };
    if want_dt && ts.is_none() {
        return Err(CliError::Config(
            "a discrete model needs --ts <hours|auto>".into(),
        ));
    }
    let fd = fd_options(&a, &cfg);
    let choice = match a.op {
        Some(OpArg::Nominal) => PointChoice::Nominal,
        Some(OpArg::Trim) => PointChoice::Trim,
        None => cfg.operating_point.unwrap_or(PointChoice::Nominal),
    };
    let op = match choice {
        PointChoice::Nominal => OperatingPoint::nominal(&plant),
        PointChoice::Trim => {
            let nom = plant.nominal();
            OperatingPoint::trimmed(&plant, nom.u.clone(), &nom.x)
                .map_err(|e| plant_error("trim", e))?
        }
    };
    println!(
        "plant {}, operating point {}",
        plant.name(),
        op.source.as_str()
    );

    let mut outcome = Outcome::default();
    let need_ct = want_ct || ts == Some(TsSpec::Auto);
    let ct = if need_ct {
        Some(
            linearize_ct(&plant, &op, &fd)
                .map_err(|e| linearize_error("continuous linearization", e))?,
        )
    } else {
        None
    };
    if let (true, Some(ct)) = (want_ct, &ct) {
        write_file(&out.join("model_ct.json"), &ct.to_document().to_json())?;
        println!("  residual norm {}", fmt_short(ct.metadata.residual_norm));
        let report = eigen_report(
            &LinearModel::Continuous(ct.model.clone()),
            EigenTolerances::continuous(),
        )
        .map_err(|e| CliError::numerical("eigenvalues", e))?;
        print_eigen_summary(&report);
        outcome.warnings.extend(
            ct.metadata
                .warnings
                .iter()
                .map(|w| format!("model_ct: {w}")),
        );
    }
    if want_dt {
        let ts = match ts.expect("checked above") {
            TsSpec::Hours(h) => h,
            TsSpec::Auto => {
                let ct = ct.as_ref().expect("computed for auto ts");
                let s = suggest_sampling_time(&ct.model)
                    .map_err(|e| CliError::numerical("sampling-time suggestion", e))?;
                println!(
                    "ts auto: max |lambda| {} 1/h, raw {} h, rounded {} h",
                    fmt_short(s.max_modulus),
                    fmt_short(s.raw),
                    fmt_short(s.rounded)
                );
                s.rounded
            }
        };
        let dt = linearize_dt(&plant, &op, ts, &fd)
            .map_err(|e| linearize_error("discrete linearization", e))?;
        write_file(&out.join("model_dt.json"), &dt.to_document().to_json())?;
        println!(
            "  ts {} h, residual norm {}",
            fmt_short(ts),
            fmt_short(dt.metadata.residual_norm)
        );
        let report = eigen_report(
            &LinearModel::Discrete(dt.model.clone()),
            EigenTolerances::discrete(),
        )
        .map_err(|e| CliError::numerical("eigenvalues", e))?;
        print_eigen_summary(&report);
        outcome.warnings.extend(
            dt.metadata
                .warnings
                .iter()
                .map(|w| format!("model_dt: {w}")),
        );
    }
    Ok(outcome)
}

pub const EIGEN_HEADER: [&str; 8] = [
    "cluster",
    "re",
    "im",
    "multiplicity",
    "modulus",
    "classes",
    "lhp",
    "imag",
];

pub fn eigen_csv(report: &EigenReport) -> String {
    let rows = report.clusters.iter().enumerate().map(|(i, c)| {
        vec![
            (i + 1).to_string(),
            fmt_csv(c.value.re),
            fmt_csv(c.value.im),
            c.multiplicity.to_string(),
            fmt_csv(c.modulus),
            c.classes.to_string(),
            flag(c.lhp),
            flag(c.imag),
        ]
    });
    csv_text(&header(&EIGEN_HEADER), rows)
}

pub fn eig(a: EigArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&a.common)?;
    let out = cfg.out_dir(a.common.out_dir.as_deref());
    let loaded = read_model(&model_path(&a.model, &cfg)?)?;
    let mut tol = cfg
        .eigen
        .resolve(EigenTolerances::for_kind(loaded.model.kind()));
    tol.cluster = a.cluster_tol.unwrap_or(tol.cluster);
    tol.integrator = a.tol_int.unwrap_or(tol.integrator);
    tol.stability = a.tol_stab.unwrap_or(tol.stability);
    for (name, v) in [
        ("cluster", tol.cluster),
        ("integrator", tol.integrator),
        ("stability", tol.stability),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::Config(format!(
                "{name} tolerance must be finite and nonnegative"
            )));
        }
    }
    let report =
        eigen_report(&loaded.model, tol).map_err(|e| CliError::numerical("eigenvalues", e))?;

    println!("{} model {}", loaded.model.kind(), loaded.stem);
    println!(
        "{:>4}  {:>14}  {:>14}  {:>4}  {:>12}  classes",
        "id", "re", "im", "mult", "modulus"
    );
    for (i, c) in report.clusters.iter().enumerate() {
        println!(
            "{:>4}  {:>14}  {:>14}  {:>4}  {:>12}  {}",
            i + 1,
            fmt_short(c.value.re),
            fmt_short(c.value.im),
            c.multiplicity,
            fmt_short(c.modulus),
            c.classes
        );
    }
    print_eigen_summary(&report);
    write_file(
        &out.join(format!("{}_eigen.csv", loaded.stem)),
        &eigen_csv(&report),
    )?;
    write_file(
        &out.join(format!("{}_eigen.json", loaded.stem)),
        &to_json(&report),
    )?;
    Ok(Outcome::default())
}

pub const SWEEP_HEADER: [&str; 6] = [
    "omega_rad_per_h",
    "sigma_max",
    "sigma_min",
    "gamma",
    "rank",
    "gap",
];

pub fn sweep_csv(sweep: &FrequencySweep) -> String {
    let rows = sweep.points.iter().map(|p| {
        vec![
            fmt_csv(p.omega),
            opt_csv(p.sigma_max),
            opt_csv(p.sigma_min),
            opt_csv(p.gamma),
            p.rank.map(|r| r.to_string()).unwrap_or_default(),
            flag(p.gap),
        ]
    });
    csv_text(&header(&SWEEP_HEADER), rows)
}

pub fn sweep(a: SweepArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&a.common)?;
    let out = cfg.out_dir(a.common.out_dir.as_deref());
    let loaded = read_model(&model_path(&a.model, &cfg)?)?;
    let grid = FrequencyGrid::logspace(
        a.grid_min.or(cfg.grid.min).unwrap_or(GRID_MIN),
        a.grid_max.or(cfg.grid.max).unwrap_or(GRID_MAX),
        a.grid_points.or(cfg.grid.points).unwrap_or(GRID_POINTS),
    )
    .map_err(|e| CliError::Config(format!("frequency grid: {e}")))?;
    let tol = match a.rank_tol.as_deref().or(cfg.rank_tolerance.as_deref()) {
        Some(s) => parse_rank_tol(s)?,
        None => RankTolerance::Default,
    };

    let mut outcome = Outcome::default();
    let grid = match &loaded.model {
        LinearModel::Discrete(m) => {
            let nyquist = m.nyquist();
            let (kept, dropped) = grid
                .clip_to(nyquist)
                .map_err(|e| CliError::Config(format!("frequency grid: {e}")))?;
            if dropped > 0 {
                outcome.warnings.push(format!(
                    "dropped {dropped} grid points above the Nyquist frequency {} rad/h",
                    fmt_short(nyquist)
                ));
            }
            kept
        }
        LinearModel::Continuous(_) => grid,
    };
    let sweep =
        condition_sweep(&loaded.model, &grid, tol).map_err(|e| diagnostics_error("sweep", e))?;

    let csv = sweep_csv(&sweep);
    if a.mode != SweepMode::Rank {
        write_file(
            &out.join(format!("{}_condition_sweep.csv", loaded.stem)),
            &csv,
        )?;
    }
    if a.mode != SweepMode::Condition {
        write_file(&out.join(format!("{}_rank_sweep.csv", loaded.stem)), &csv)?;
    }
    write_file(
        &out.join(format!("{}_sweep.json", loaded.stem)),
        &to_json(&sweep),
    )?;

    let show_rank = |r: Option<usize>| r.map(|r| r.to_string()).unwrap_or_else(|| "n/a".into());
    println!(
        "{} points: max gamma {}, min rank {}, max rank {}, gaps {}",
        sweep.points.len(),
        sweep
            .max_gamma()
            .map(fmt_short)
            .unwrap_or_else(|| "n/a".into()),
        show_rank(sweep.min_rank()),
        show_rank(sweep.max_rank()),
        sweep.gaps()
    );
    if sweep.gaps() > 0 {
        outcome.warnings.push(format!(
            "{} grid points hit a pole and were left as gaps",
            sweep.gaps()
        ));
    }
    Ok(outcome)
}

struct ScenarioSettings {
    schedule: InputSchedule,
    duration: f64,
    step: f64,
    seed: u64,
    noise: bool,
}

fn scenario_settings(
    a: &ScenarioArgs,
    cfg: &ScenarioConfig,
    u0: &[f64],
) -> Result<ScenarioSettings, CliError> {
    let bad = |e: PlantError| CliError::Config(format!("input schedule: {e}"));
    let schedule = match (a.step_input, a.step_delta, &cfg.schedule) {
        (Some(i), Some(d), _) => InputSchedule::step(u0.to_vec(), i, d, a.step_at).map_err(bad)?,
        (_, _, Some(segs)) => InputSchedule::new(segs.clone()).map_err(bad)?,
        _ => InputSchedule::constant(u0.to_vec()).map_err(bad)?,
    };
    Ok(ScenarioSettings {
        schedule,
        duration: a.duration.or(cfg.duration).unwrap_or(DEFAULT_DURATION),
        step: a.step.or(cfg.step).unwrap_or(DEFAULT_STEP),
        seed: a.seed.or(cfg.seed).unwrap_or(0),
        noise: !a.no_noise && cfg.noise.unwrap_or(true),
    })
}

fn describe_termination(t: &Termination) -> Option<String> {
    match t {
        Termination::Completed => None,
        Termination::Shutdown {
            time,
            variable,
            limit,
            value,
            ..
        } => Some(format!(
            "shutdown at t = {} h: {variable} = {} crossed limit {}",
            fmt_short(*time),
            fmt_short(*value),
            fmt_short(*limit)
        )),
    }
}

pub fn compare_csv(report: &CompareReport) -> String {
    let mut cols = header(&["channel", "nominal", "eq1_percent"]);
    cols.extend(report.models.iter().map(|m| format!("eq2_{}", m.name)));
    let rows = report.channels.iter().enumerate().map(|(i, ch)| {
        let mut row = vec![
            ch.clone(),
            fmt_csv(report.nominal[i]),
            fmt_csv(report.nonlinear.values[i]),
        ];
        row.extend(report.models.iter().map(|m| fmt_csv(m.profile.values[i])));
        row
    });
    csv_text(&cols, rows)
}

pub const ERRORBAR_HEADER: [&str; 4] = ["model", "channel", "center_eq1_percent", "half_width_eq2"];

pub fn errorbar_csv(report: &CompareReport) -> String {
    let rows = report.error_bars.iter().map(|b| {
        vec![
            b.model.clone(),
            b.channel.clone(),
            fmt_csv(b.center),
            fmt_csv(b.half_width),
        ]
    });
    csv_text(&header(&ERRORBAR_HEADER), rows)
}

pub fn compare(a: CompareArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&a.common)?;
    let out = cfg.out_dir(a.common.out_dir.as_deref());
    let paths = if a.models.is_empty() {
        cfg.models.clone()
    } else {
        a.models.clone()
    };
    if paths.is_empty() {
        return Err(CliError::Config(
            "no models to compare (--model FILE, repeatable)".into(),
        ));
    }
    let models = paths
        .iter()
        .map(|p| read_model(p))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, m) in models.iter().enumerate() {
        if models[..i].iter().any(|o| o.stem == m.stem) {
            return Err(CliError::Config(format!(
                "two models share the name {:?}",
                m.stem
            )));
        }
    }

    let recorded = models.iter().find_map(|m| m.metadata.as_ref());
    let plant_name = a
        .plant
        .clone()
        .or_else(|| cfg.plant.clone())
        .or_else(|| recorded.and_then(|md| md.plant.clone()));
    let mut plant = plant_named(plant_name.as_deref())?;
    let op = match recorded {
        Some(md) => {
            OperatingPoint::user(md.operating_point.x.clone(), md.operating_point.u.clone())
        }
        None => OperatingPoint::nominal(&plant),
    };
    for m in &models {
        if let Some(md) = &m.metadata {
            if md.operating_point.x != op.x || md.operating_point.u != op.u {
                return Err(CliError::Config(format!(
                    "model {} was linearized at a different operating point",
                    m.stem
                )));
            }
        }
    }
    let candidates: Vec<CandidateModel> = models
        .iter()
        .map(|m| {
            let c = CandidateModel::new(m.stem.clone(), m.model.clone());
            match &m.metadata {
                Some(md) => c.with_residual(md.residual.clone()),
                None => c,
            }
        })
        .collect();

    let s = scenario_settings(&a.scenario, &cfg.scenario, &op.u)?;
    if !s.noise {
        plant = plant.noise_free();
    }
    let scenario = Scenario {
        schedule: s.schedule,
        duration: s.duration,
        step: s.step,
        seed: s.seed,
        repeats: a.repeats.or(cfg.scenario.repeats).unwrap_or(1),
    };
    let report = compare_linearizations(&plant, &op, &candidates, &scenario)
        .map_err(|e| diagnostics_error("comparison", e))?;

    write_file(&out.join("compare.csv"), &compare_csv(&report))?;
    write_file(&out.join("compare_errorbars.csv"), &errorbar_csv(&report))?;
    write_file(&out.join("compare.json"), &to_json(&report))?;

    println!(
        "plant {}, {} h, seed {}, repeats {}",
        report.plant,
        fmt_short(report.end_time),
        report.seed,
        report.repeats
    );
    println!(
        "  nonlinear deviation from nominal: sum |eq1| = {} %",
        fmt_short(report.nonlinear.aggregate)
    );
    for m in &report.models {
        println!(
            "  {} ({}): sum |eq2| = {}",
            m.name,
            m.kind,
            fmt_short(m.profile.aggregate)
        );
    }
    for r in &report.ratios {
        let v = r.value.map(fmt_short).unwrap_or_else(|| "undefined".into());
        println!("  ratio {}/{} = {v}", r.numerator, r.denominator);
    }
    let mut outcome = Outcome::default();
    outcome
        .warnings
        .extend(describe_termination(&report.termination));
    Ok(outcome)
}

pub fn simulate(a: SimulateArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&a.common)?;
    let out = cfg.out_dir(a.common.out_dir.as_deref());
    let plant = plant_named(a.plant.as_deref().or(cfg.plant.as_deref()))?;
    let nominal = plant.nominal().clone();
    let s = scenario_settings(&a.scenario, &cfg.scenario, &nominal.u)?;
    let mut opts = SimOptions::new(s.duration, s.seed).with_step(s.step);
    if !s.noise {
        opts = opts.without_noise();
    }
    let trace = run_plant(&plant, &s.schedule, &nominal.x, &opts)
        .map_err(|e| plant_error("simulation", e))?;
    let sidecar = write_trace(&trace, &out, "trace").map_err(|e| plant_error("trace output", e))?;
    for g in &sidecar.groups {
        println!(
            "wrote {} ({} samples)",
            out.join(&g.file).display(),
            g.samples
        );
    }
    println!("wrote {}", out.join("trace.json").display());
    println!(
        "plant {}, ran {} h of {} h",
        plant.name(),
        fmt_short(trace.end_time),
        fmt_short(trace.duration)
    );
    let mut outcome = Outcome::default();
    outcome
        .warnings
        .extend(describe_termination(&trace.termination));
    Ok(outcome)
}
