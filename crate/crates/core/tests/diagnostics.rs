use linspect::diagnostics::{
    classify_ct, classify_dt, compare_linearizations, condition_sweep, eigen_report,
    linearization_error_profile, nominal_deviation_profile, numerical_rank, rank_sweep,
    report_from_values, CandidateModel, DiagnosticsError, EigenTolerances, RankTolerance, Scenario,
};
use linspect::linearize::{linearize_ct, linearize_dt, FdOptions, OperatingPoint};
use linspect::numerics::{Complex64, RealMatrix};
use linspect::plants::{
    cstr, linear_demo, rsr, ChannelSeries, FnDynamics, InputSchedule, Monitored, PlantDescriptor,
    SimulationTrace, Termination,
};
use linspect::statespace::{
    suggest_sampling_time, ContinuousLinearModel, DiscreteLinearModel, FrequencyGrid, LinearModel,
    ModelKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn classification_fixtures() {
    let ct = EigenTolerances::continuous();
    let dt = EigenTolerances::discrete();
    let k = classify_ct(c(3.0648, 5.0837), ct.integrator, ct.stability);
    assert_eq!(k.labels(), vec!["unstable", "oscillatory"]);
    assert_eq!(
        classify_ct(c(-9.3925e-7, 0.0), 1e-5, 0.0).labels(),
        vec!["integrator"]
    );
    assert_eq!(
        classify_ct(c(-1968.1, 0.0), 1e-5, 0.0).labels(),
        vec!["stable"]
    );
    let k = classify_dt(c(1.0008, 0.0013), dt.integrator, dt.stability);
    assert_eq!(k.labels(), vec!["unstable", "oscillatory"]);
    assert_eq!(
        classify_dt(c(1.0, 0.0), 1e-4, 0.0).labels(),
        vec!["integrator"]
    );
    assert_eq!(
        classify_dt(c(0.6114, 0.0), 1e-4, 0.0).labels(),
        vec!["stable"]
    );
    assert_eq!(
        classify_dt(c(0.9997, 0.0), 1e-4, 0.0).labels(),
        vec!["stable"]
    );
}

#[test]
fn eigen_report_examples() {
    let mut values = vec![c(0.9987, 0.0); 7];
    values.extend([c(0.6114, 0.0), c(1.0008, 0.0013), c(1.0008, -0.0013)]);
    let r = report_from_values(&values, ModelKind::Discrete, EigenTolerances::discrete());
    let big = r.clusters.iter().find(|k| k.multiplicity == 7).unwrap();
    assert!((big.value - c(0.9987, 0.0)).norm() < 1e-15);
    assert_eq!(r.total_multiplicity(), 10);
    assert_eq!(r.clusters[0].value, c(0.6114, 0.0));
    assert_eq!(r.count(|k| k.unstable), 2);
}

#[test]
fn bundled_eigen_reports() {
    let p = rsr();
    let op = OperatingPoint::nominal(&p);
    let ct = linearize_ct(&p, &op, &FdOptions::default()).unwrap();
    let r = eigen_report(&ct.model.clone().into(), EigenTolerances::continuous()).unwrap();
    assert_eq!(r.total_multiplicity(), 8);
    assert_eq!(r.count(|k| k.integrator), 1);
    assert!(r.count(|k| k.unstable) >= 1);

    let dt = linearize_dt(&p, &op, 0.01, &FdOptions::default()).unwrap();
    let r = eigen_report(&dt.model.into(), EigenTolerances::discrete()).unwrap();
    assert_eq!(r.total_multiplicity(), 8);
    assert_eq!(r.count(|k| k.integrator), 1);
    assert!(r.clusters.windows(2).all(|w| w[0].modulus <= w[1].modulus));
}

fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> ContinuousLinearModel {
    let mut mat = |r: usize, k: usize| {
        RealMatrix::new(
            r,
            k,
            (0..r * k).map(|_| rng.random_range(-2.0..2.0)).collect(),
        )
        .unwrap()
    };
    ContinuousLinearModel::new(mat(n, n), mat(n, m), mat(p, n), mat(p, m)).unwrap()
}

#[test]
fn eigen_report_invariants_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=9);
        let m: LinearModel = random_model(&mut rng, n, 1, 1).into();
        let r = eigen_report(&m, EigenTolerances::continuous()).unwrap();
        assert_eq!(r.total_multiplicity(), n);
        for k in &r.clusters {
            assert!(!k.classes.labels().is_empty());
            if k.value.im != 0.0 {
                let partner = r
                    .clusters
                    .iter()
                    .find(|o| (o.value - k.value.conj()).norm() <= 1e-9 * (1.0 + k.modulus))
                    .expect("conjugate cluster");
                assert_eq!(partner.multiplicity, k.multiplicity);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn discrete_and_continuous_stability_agree(
        re in -10.0f64..10.0,
        im in -10.0f64..10.0,
        frac in 0.01f64..1.0,
    ) {
        prop_assume!(re.abs() > 1e-3);
        let ts = 0.1 * frac / re.abs();
        let l = c(re, im);
        let z = (l * ts).exp();
        let kc = classify_ct(l, 1e-5, 0.0);
        let kd = classify_dt(z, 1e-4, 0.0);
        prop_assume!(!kc.integrator && !kd.integrator);
        prop_assert_eq!(kc.unstable, kd.unstable);
        prop_assert_eq!(kc.stable, kd.stable);
    }
}

fn identity_tfm() -> LinearModel {
    ContinuousLinearModel::new(
        RealMatrix::identity(2).scaled(-1.0),
        RealMatrix::zeros(2, 2),
        RealMatrix::zeros(2, 2),
        RealMatrix::identity(2),
    )
    .unwrap()
    .into()
}

fn diag_first_order() -> LinearModel {
    // G(s) = diag(1, 1/(s+1))
    ContinuousLinearModel::new(
        RealMatrix::from_rows(&[[-1.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0, 1.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0], [1.0]]).unwrap(),
        RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap(),
    )
    .unwrap()
    .into()
}

#[test]
fn condition_sweep_fixtures() {
    let grid = FrequencyGrid::default_sweep();
    let s = condition_sweep(&identity_tfm(), &grid, RankTolerance::Default).unwrap();
    assert_eq!(s.points.len(), grid.len());
    for p in &s.points {
        assert!((p.gamma.unwrap() - 1.0).abs() <= 1e-12);
        assert_eq!(p.rank, Some(2));
    }

    let grid = FrequencyGrid::from_points(vec![0.1, 1.0, 10.0]).unwrap();
    let s = condition_sweep(&diag_first_order(), &grid, RankTolerance::Default).unwrap();
    assert!((s.points[1].gamma.unwrap() - 2f64.sqrt()).abs() <= 1e-10);
}

#[test]
fn condition_number_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = FrequencyGrid::logspace(1e-2, 1e2, 40).unwrap();
    for _ in 0..20 {
        let m = random_model(&mut rng, 4, 3, 3);
        let scale = rng.random_range(0.1..10.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let scaled = ContinuousLinearModel::new(
            m.sys.a.clone(),
            m.sys.b.clone(),
            m.sys.c.scaled(scale),
            m.sys.d.scaled(scale),
        )
        .unwrap();
        let s1 = condition_sweep(&m.into(), &grid, RankTolerance::Default).unwrap();
        let s2 = condition_sweep(&scaled.into(), &grid, RankTolerance::Default).unwrap();
        for (a, b) in s1.points.iter().zip(&s2.points) {
            if let (Some(ga), Some(gb)) = (a.gamma, b.gamma) {
                assert!(ga >= 1.0);
                assert!((ga - gb).abs() <= 1e-8 * ga);
            }
        }
    }
}

#[test]
fn numerical_rank_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let len = rng.random_range(0..8);
        let mut sigma: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.1) {
                    0.0
                } else {
                    10f64.powf(rng.random_range(-20.0..2.0))
                }
            })
            .collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        let (p, m) = (rng.random_range(1..6), rng.random_range(1..6));
        let smax = sigma.first().copied().unwrap_or(0.0);
        let default_thr = p.max(m) as f64 * f64::EPSILON * smax;
        let brute = sigma.iter().filter(|&&s| s > default_thr).count();
        assert_eq!(
            numerical_rank(&sigma, p, m, RankTolerance::Default).unwrap(),
            brute
        );

        let tau = 10f64.powf(rng.random_range(-20.0..2.0));
        let brute = sigma.iter().filter(|&&s| s > tau).count();
        let got = numerical_rank(&sigma, p, m, RankTolerance::Absolute(tau)).unwrap();
        assert_eq!(got, brute);
        let looser = numerical_rank(&sigma, p, m, RankTolerance::Absolute(tau * 10.0)).unwrap();
        assert!(looser <= got);
    }
}

#[test]
fn rank_sweep_bounds() {
    let p = rsr();
    let lin = linearize_ct(&p, &OperatingPoint::nominal(&p), &FdOptions::default()).unwrap();
    let s = rank_sweep(
        &lin.model.into(),
        &FrequencyGrid::default_sweep(),
        RankTolerance::Default,
    )
    .unwrap();
    assert!(s.max_rank().unwrap() <= 4);
    assert!(s.points.iter().all(|q| q.gamma.is_none_or(|g| g >= 1.0)));

    let full = rank_sweep(
        &identity_tfm(),
        &FrequencyGrid::default_sweep(),
        RankTolerance::Default,
    )
    .unwrap();
    assert_eq!((full.min_rank(), full.max_rank()), (Some(2), Some(2)));
    assert!(full.rank_changes().is_empty());
}

#[test]
fn discrete_sweep_rejects_frequencies_above_nyquist() {
    let m: LinearModel = DiscreteLinearModel::new(
        RealMatrix::from_rows(&[[0.5]]).unwrap(),
        RealMatrix::from_rows(&[[1.0]]).unwrap(),
        RealMatrix::from_rows(&[[1.0]]).unwrap(),
        RealMatrix::from_rows(&[[0.0]]).unwrap(),
        0.1,
    )
    .unwrap()
    .into();
    let grid = FrequencyGrid::from_points(vec![1.0, 100.0]).unwrap();
    assert!(condition_sweep(&m, &grid, RankTolerance::Default).is_err());
    let (clipped, dropped) = grid.clip_to(std::f64::consts::PI / 0.1).unwrap();
    assert_eq!(dropped, 1);
    assert!(condition_sweep(&m, &clipped, RankTolerance::Default).is_ok());
}

fn trace(values: Vec<Vec<f64>>) -> SimulationTrace {
    SimulationTrace {
        plant: "fixture".into(),
        channels: values
            .into_iter()
            .enumerate()
            .map(|(j, v)| ChannelSeries {
                label: format!("y{j}"),
                period: 0.1,
                times: (0..v.len()).map(|k| k as f64 * 0.1).collect(),
                values: v,
            })
            .collect(),
        step: 0.1,
        seed: 0,
        duration: 1.0,
        end_time: 1.0,
        noise: false,
        termination: Termination::Completed,
        final_state: vec![],
    }
}

#[test]
fn deviation_fixtures() {
    let at_nominal = trace(vec![vec![3.0; 4], vec![-2.0; 4]]);
    let p = nominal_deviation_profile(&at_nominal, &[3.0, -2.0]).unwrap();
    assert_eq!(p.values, vec![0.0, 0.0]);

    let t = trace(vec![vec![1.0, 1.2], vec![0.30, 0.30]]);
    let p = nominal_deviation_profile(&t, &[1.0, 0.25]).unwrap();
    assert!((p.values[0] - 10.0).abs() <= 1e-12);
    assert!((p.values[1] - 20.0).abs() <= 1e-12);

    let e = linearization_error_profile(&at_nominal, &at_nominal, &[3.0, -2.0]).unwrap();
    assert_eq!((e.values.clone(), e.aggregate), (vec![0.0, 0.0], 0.0));

    let nl = trace(vec![
        vec![1.0, 2.0, 3.0],
        vec![5.0, 5.0, 5.0],
        vec![0.0, 1.0, 0.0],
    ]);
    let lin = trace(vec![
        vec![1.5, 2.5, 3.5],
        vec![2.5, 2.5, 2.5],
        vec![2.0, 3.0, 2.0],
    ]);
    let e = linearization_error_profile(&lin, &nl, &[1.0, 5.0, 2.0]).unwrap();
    assert!((e.values[0] - 0.5).abs() <= 1e-12);
    assert!((e.values[1] + 0.5).abs() <= 1e-12);
    assert!((e.values[2] - 1.0).abs() <= 1e-12);
    assert!((e.aggregate - 2.0).abs() <= 1e-12);
}

#[test]
fn error_aggregate_is_linear_in_offsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..6).map(|_| rng.random_range(1.0..2.0)).collect())
        .collect();
    let offsets: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..6).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    let nominal = [1.5, 1.2, 1.7];
    let shifted = |k: f64| {
        trace(
            base.iter()
                .zip(&offsets)
                .map(|(b, o)| b.iter().zip(o).map(|(x, d)| x + k * d).collect())
                .collect(),
        )
    };
    let nl = trace(base.clone());
    let a1 = linearization_error_profile(&shifted(1.0), &nl, &nominal)
        .unwrap()
        .aggregate;
    for k in [-3.0, 0.5, 4.0] {
        let ak = linearization_error_profile(&shifted(k), &nl, &nominal)
            .unwrap()
            .aggregate;
        assert!((ak - k.abs() * a1).abs() <= 1e-12 * (1.0 + ak));
    }
}

#[test]
fn exact_model_comparison_is_clean() {
    let p = linear_demo();
    let op = OperatingPoint::nominal(&p);
    let lin = linearize_ct(&p, &op, &FdOptions::default()).unwrap();
    let mut scenario = Scenario::new(
        InputSchedule::step(op.u.clone(), 0, 0.5, 0.2).unwrap(),
        1.0,
        1,
    );
    scenario.step = 1e-3;
    let report = compare_linearizations(
        &p,
        &op,
        &[CandidateModel::from_linearization("ct", &lin)],
        &scenario,
    )
    .unwrap();
    assert!(
        report.models[0].profile.aggregate <= 1e-6,
        "{}",
        report.models[0].profile.aggregate
    );
    assert!(report.nonlinear.values[0] > 0.0);
}

fn cstr_report(seed: u64) -> linspect::diagnostics::CompareReport {
    let p = cstr();
    let op = OperatingPoint::nominal(&p);
    let ct = linearize_ct(&p, &op, &FdOptions::default()).unwrap();
    let ts = suggest_sampling_time(&ct.model).unwrap().rounded;
    let dt = linearize_dt(&p, &op, ts, &FdOptions::default()).unwrap();
    let mut scenario = Scenario::new(
        InputSchedule::step(op.u.clone(), 0, -0.5, 0.1).unwrap(),
        1.0,
        seed,
    );
    scenario.repeats = 2;
    let candidates = [
        CandidateModel::from_linearization("ct", &ct),
        CandidateModel::from_linearization("dt", &dt),
    ];
    compare_linearizations(&p, &op, &candidates, &scenario).unwrap()
}

#[test]
fn two_model_comparison_is_self_consistent() {
    let r = cstr_report(7);
    assert_eq!(r.models.len(), 2);
    assert_eq!(r.ratios.len(), 1);
    let ratio = r.ratios[0].value.unwrap();
    assert_eq!(
        ratio,
        r.models[0].profile.aggregate / r.models[1].profile.aggregate
    );
    for bar in &r.error_bars {
        let m = r.models.iter().find(|m| m.name == bar.model).unwrap();
        let j = r.channels.iter().position(|ch| *ch == bar.channel).unwrap();
        assert_eq!(bar.half_width, m.profile.values[j].abs());
        assert_eq!(bar.center, r.nonlinear.values[j]);
    }
    let again = cstr_report(7);
    assert_eq!(
        serde_json::to_string(&r).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    assert_ne!(r.nonlinear.values, cstr_report(8).nonlinear.values);
}

fn ramp_plant(limit: f64) -> PlantDescriptor {
    // ẋ = u, y = x + 1, x ≤ limit
    PlantDescriptor::builder(
        "ramp",
        FnDynamics::new(
            1,
            1,
            1,
            |_x, u, dx| dx[0] = u[0],
            |x, _u, y| y[0] = x[0] + 1.0,
        ),
        vec![0.0],
        vec![1.0],
    )
    .sample_periods(vec![0.1])
    .constraint(Monitored::State(0), f64::NEG_INFINITY, limit)
    .build()
    .unwrap()
}

fn frozen_candidate() -> CandidateModel {
    let m = ContinuousLinearModel::new(
        RealMatrix::zeros(1, 1),
        RealMatrix::zeros(1, 1),
        RealMatrix::identity(1),
        RealMatrix::zeros(1, 1),
    )
    .unwrap();
    CandidateModel::new("frozen", m.into())
}

#[test]
fn comparison_is_truncated_at_shutdown() {
    let p = ramp_plant(0.55);
    let op = OperatingPoint::nominal(&p);
    let mut scenario = Scenario::new(InputSchedule::constant(vec![1.0]).unwrap(), 1.0, 0);
    scenario.step = 0.01;
    let r = compare_linearizations(&p, &op, &[frozen_candidate()], &scenario).unwrap();
    assert!(r.termination.is_shutdown());
    assert!(r.end_time > 0.55 && r.end_time < 0.57);
    // samples at 0, 0.1, ..., 0.5: mean of (1 − (1 + t)) / 1 = −0.25
    assert!((r.models[0].profile.values[0] + 0.25).abs() < 1e-9);
}

#[test]
fn early_shutdown_is_insufficient_data() {
    let p = ramp_plant(0.05);
    let op = OperatingPoint::nominal(&p);
    let mut scenario = Scenario::new(InputSchedule::constant(vec![1.0]).unwrap(), 1.0, 0);
    scenario.step = 0.01;
    let err = compare_linearizations(&p, &op, &[frozen_candidate()], &scenario).unwrap_err();
    assert!(
        matches!(err, DiagnosticsError::InsufficientData { samples: 1, .. }),
        "{err:?}"
    );
}
