use super::deviation::{linearization_error_profile, nominal_deviation_profile, DeviationProfile};
use super::DiagnosticsError;
use crate::linearize::{Linearization, OperatingPoint};
use crate::numerics::RealMatrix;
use crate::plants::{
    simulate, ChannelSeries, InputSchedule, PlantDescriptor, PlantDynamics, SimOptions,
    SimulationTrace, Termination, DEFAULT_STEP,
};
use crate::statespace::{LinearModel, ModelKind, Quadruple};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A linear model entered into a comparison, with the affine term its
/// linearization dropped.
#[derive(Clone, Debug)]
pub struct CandidateModel {
    pub name: String,
    pub model: LinearModel,
    /// `f(x_op, u_op)` for continuous models, `Φ(x_op, u_op) − x_op` for
    /// discrete ones.
    pub residual: Vec<f64>,
}

impl CandidateModel {
    pub fn new(name: impl Into<String>, model: LinearModel) -> Self {
        let n = model.sys().n_states();
        Self {
            name: name.into(),
            model,
            residual: vec![0.0; n],
        }
    }

    pub fn with_residual(mut self, residual: Vec<f64>) -> Self {
        self.residual = residual;
        self
    }

    pub fn from_linearization<M: Clone + Into<LinearModel>>(
        name: impl Into<String>,
        lin: &Linearization<M>,
    ) -> Self {
        Self::new(name, lin.model.clone().into()).with_residual(lin.metadata.residual.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schedule: InputSchedule,
    pub duration: f64,
    pub step: f64,
    pub seed: u64,
    /// Nonlinear runs averaged, with seeds `seed, seed + 1, ...`.
    pub repeats: usize,
}

impl Scenario {
    pub fn new(schedule: InputSchedule, duration: f64, seed: u64) -> Self {
        Self {
            schedule,
            duration,
            step: DEFAULT_STEP,
            seed,
            repeats: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub name: String,
    pub kind: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ts: Option<f64>,
    pub profile: DeviationProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRatio {
    pub numerator: String,
    pub denominator: String,
    /// `None` when the denominator aggregate is zero.
    pub value: Option<f64>,
}

/// One error bar: centred on the nominal-relative deviation of the
/// nonlinear run, half-width the model's absolute linearization error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBar {
    pub model: String,
    pub channel: String,
    pub center: f64,
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub plant: String,
    pub seed: u64,
    pub repeats: usize,
    pub duration: f64,
    pub step: f64,
    pub end_time: f64,
    pub termination: Termination,
    pub channels: Vec<String>,
    pub nominal: Vec<f64>,
    pub nonlinear: DeviationProfile,
    pub models: Vec<ModelComparison>,
    pub ratios: Vec<AggregateRatio>,
    pub error_bars: Vec<ErrorBar>,
}

/// Continuous linear model in absolute coordinates around an operating
/// point, including the affine residual.
struct AffineDynamics {
    sys: Quadruple,
    x_op: Vec<f64>,
    u_op: Vec<f64>,
    y_op: Vec<f64>,
    residual: Vec<f64>,
}

fn affine_apply(m: &RealMatrix, v: &[f64], origin: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o += m
            .row(i)
            .iter()
            .zip(v.iter().zip(origin))
            .map(|(a, (x, x0))| a * (x - x0))
            .sum::<f64>();
    }
}

impl AffineDynamics {
    fn state_map(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.residual);
        affine_apply(&self.sys.a, x, &self.x_op, out);
        affine_apply(&self.sys.b, u, &self.u_op, out);
    }
}

impl PlantDynamics for AffineDynamics {
    fn n_states(&self) -> usize {
        self.sys.n_states()
    }
    fn n_inputs(&self) -> usize {
        self.sys.n_inputs()
    }
    fn n_outputs(&self) -> usize {
        self.sys.n_outputs()
    }
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        self.state_map(x, u, dx)
    }
    fn output(&self, x: &[f64], u: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.y_op);
        affine_apply(&self.sys.c, x, &self.x_op, y);
        affine_apply(&self.sys.d, u, &self.u_op, y);
    }
}

fn average(traces: Vec<SimulationTrace>) -> SimulationTrace {
    let k = traces.len() as f64;
    let mut it = traces.into_iter();
    let mut acc = it.next().expect("at least one repeat");
    for t in it {
        for (a, c) in acc.channels.iter_mut().zip(t.channels) {
            let n = a.values.len().min(c.values.len());
            a.values.truncate(n);
            a.times.truncate(n);
            for (x, y) in a.values.iter_mut().zip(c.values) {
                *x += y;
            }
        }
    }
    for c in &mut acc.channels {
        c.values.iter_mut().for_each(|v| *v /= k);
    }
    acc
}

fn simulate_discrete(
    cand: &CandidateModel,
    ts: f64,
    reference: &SimulationTrace,
    schedule: &InputSchedule,
    op: &OperatingPoint,
    y_op: &[f64],
) -> SimulationTrace {
    let sys = cand.model.sys();
    let affine = AffineDynamics {
        sys: sys.clone(),
        x_op: op.x.clone(),
        u_op: op.u.clone(),
        y_op: y_op.to_vec(),
        residual: cand.residual.clone(),
    };
    let snap = 1e-9 * ts;
    let sample_u = |j: usize| schedule.at(j as f64 * ts + snap);
    let last_time = reference
        .channels
        .iter()
        .filter_map(|c| c.times.last())
        .fold(0.0f64, |m, &t| m.max(t));
    let last_j = (last_time / ts + 1e-9).floor() as usize;
    let mut states = Vec::with_capacity(last_j + 1);
    states.push(op.x.clone());
    let mut next = vec![0.0; op.x.len()];
    for j in 0..last_j {
        // x⁺ = x_op + Φ(x − x_op) + Γ(u − u_op) + r, reusing the affine map
        affine.state_map(&states[j], sample_u(j), &mut next);
        for (v, x0) in next.iter_mut().zip(&op.x) {
            *v += x0;
        }
        states.push(next.clone());
    }
    let mut y = vec![0.0; sys.n_outputs()];
    let channels = reference
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let values = c
                .times
                .iter()
                .map(|&t| {
                    let j = ((t / ts + 1e-9).floor() as usize).min(last_j);
                    affine.output(&states[j], sample_u(j), &mut y);
                    y[i]
                })
                .collect();
            ChannelSeries {
                label: c.label.clone(),
                period: c.period,
                times: c.times.clone(),
                values,
            }
        })
        .collect();
    SimulationTrace {
        plant: cand.name.clone(),
        channels,
        step: ts,
        seed: 0,
        duration: reference.duration,
        end_time: reference.end_time,
        noise: false,
        termination: Termination::Completed,
        final_state: states.pop().expect("initial state present"),
    }
}

fn simulate_candidate(
    plant: &PlantDescriptor,
    cand: &CandidateModel,
    reference: &SimulationTrace,
    op: &OperatingPoint,
    y_op: &[f64],
    scenario: &Scenario,
) -> Result<SimulationTrace, DiagnosticsError> {
    match &cand.model {
        LinearModel::Continuous(m) => {
            let dynamics = AffineDynamics {
                sys: m.sys.clone(),
                x_op: op.x.clone(),
                u_op: op.u.clone(),
                y_op: y_op.to_vec(),
                residual: cand.residual.clone(),
            };
            let linear =
                PlantDescriptor::builder(cand.name.clone(), dynamics, op.x.clone(), op.u.clone())
                    .labels(plant.labels().clone())
                    .sample_periods(plant.sample_periods().to_vec())
                    .build()?;
            let opts = SimOptions::new(scenario.duration, scenario.seed)
                .with_step(scenario.step)
                .without_noise();
            Ok(simulate(&linear, &scenario.schedule, &op.x, &opts)?)
        }
        LinearModel::Discrete(m) => Ok(simulate_discrete(
            cand,
            m.ts,
            reference,
            &scenario.schedule,
            op,
            y_op,
        )),
    }
}

/// Runs the nonlinear plant and every candidate model under the same
/// scenario, starting at the operating point, and scores each candidate by
/// its linearization error against the nonlinear response.
///
/// Continuous candidates are integrated with the scenario step; discrete
/// ones advance at their own period with sampled inputs, and their outputs
/// are held between samples. All runs are cut where the nonlinear plant
/// stopped.
pub fn compare_linearizations(
    plant: &PlantDescriptor,
    op: &OperatingPoint,
    candidates: &[CandidateModel],
    scenario: &Scenario,
) -> Result<CompareReport, DiagnosticsError> {
    if candidates.is_empty() {
        return Err(DiagnosticsError::Parameter("no models to compare".into()));
    }
    if scenario.repeats == 0 {
        return Err(DiagnosticsError::Parameter(
            "repeats must be at least 1".into(),
        ));
    }
    let (n, m, p) = (plant.n_states(), plant.n_inputs(), plant.n_outputs());
    if op.x.len() != n || op.u.len() != m {
        return Err(DiagnosticsError::Comparison(
            "operating point does not fit the plant".into(),
        ));
    }
    for c in candidates {
        let s = c.model.sys();
        if (s.n_states(), s.n_inputs(), s.n_outputs()) != (n, m, p) || c.residual.len() != n {
            return Err(DiagnosticsError::Comparison(format!(
                "model {} does not share the plant's dimensions",
                c.name
            )));
        }
    }
    let y_op = plant.dynamics().eval_output(&op.x, &op.u);

    let runs = (0..scenario.repeats as u64)
        .into_par_iter()
        .map(|k| {
            let opts = SimOptions::new(scenario.duration, scenario.seed.wrapping_add(k))
                .with_step(scenario.step);
            simulate(plant, &scenario.schedule, &op.x, &opts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let nonlinear = average(runs);
    for c in &nonlinear.channels {
        if c.len() < 2 {
            return Err(DiagnosticsError::InsufficientData {
                channel: c.label.clone(),
                samples: c.len(),
            });
        }
    }
    let drift = nominal_deviation_profile(&nonlinear, &y_op)?;

    let models = candidates
        .par_iter()
        .map(|cand| {
            let lin = simulate_candidate(plant, cand, &nonlinear, op, &y_op, scenario)?;
            let profile = linearization_error_profile(&lin, &nonlinear, &y_op)?;
            Ok(ModelComparison {
                name: cand.name.clone(),
                kind: cand.model.kind(),
                ts: cand.model.ts(),
                profile,
            })
        })
        .collect::<Result<Vec<_>, DiagnosticsError>>()?;

    let mut ratios = Vec::new();
    for (i, a) in models.iter().enumerate() {
        for b in &models[i + 1..] {
            let den = b.profile.aggregate;
            ratios.push(AggregateRatio {
                numerator: a.name.clone(),
                denominator: b.name.clone(),
                value: (den != 0.0).then(|| a.profile.aggregate / den),
            });
        }
    }
    let drift_ref = &drift;
    let error_bars = models
        .iter()
        .flat_map(|mc| {
            drift_ref
                .channels
                .iter()
                .enumerate()
                .map(move |(j, ch)| ErrorBar {
                    model: mc.name.clone(),
                    channel: ch.clone(),
                    center: drift_ref.values[j],
                    half_width: mc.profile.values[j].abs(),
                })
        })
        .collect();

    Ok(CompareReport {
        plant: plant.name().to_string(),
        seed: scenario.seed,
        repeats: scenario.repeats,
        duration: scenario.duration,
        step: scenario.step,
        end_time: nonlinear.end_time,
        termination: nonlinear.termination.clone(),
        channels: drift.channels.clone(),
        nominal: y_op,
        nonlinear: drift,
        models,
        ratios,
        error_bars,
    })
}
