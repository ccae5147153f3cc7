use super::{InputSchedule, Monitored, PlantDescriptor, PlantDynamics, PlantError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Default fixed RK4 step, in hours.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Relative slack used when matching times against the step grid.
const GRID_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    pub duration: f64,
    pub step: f64,
    pub seed: u64,
    /// When false, every channel is reported noise-free.
    pub noise: bool,
}

impl SimOptions {
    pub fn new(duration: f64, seed: u64) -> Self {
        Self {
            duration,
            step: DEFAULT_STEP,
            seed,
            noise: true,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn without_noise(mut self) -> Self {
        self.noise = false;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Low,
    High,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Termination {
    Completed,
    Shutdown {
        time: f64,
        variable: String,
        bound: Bound,
        limit: f64,
        value: f64,
    },
}

impl Termination {
    pub fn is_shutdown(&self) -> bool {
        matches!(self, Termination::Shutdown { .. })
    }
}

/// Samples of one measured output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSeries {
    pub label: String,
    /// Sampling period in hours; 0 means every solver step.
    pub period: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ChannelSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace {
    pub plant: String,
    pub channels: Vec<ChannelSeries>,
    pub step: f64,
    pub seed: u64,
    pub duration: f64,
    /// Time the integration stopped, equal to `duration` unless shut down.
    pub end_time: f64,
    pub noise: bool,
    pub termination: Termination,
    pub final_state: Vec<f64>,
}

/// Classical fourth-order Runge–Kutta with reusable scratch space.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    pub(crate) fn step(&mut self, f: &dyn PlantDynamics, x: &mut [f64], u: &[f64], h: f64) {
        f.derivative(x, u, &mut self.k1);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        f.derivative(&self.tmp, u, &mut self.k2);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        f.derivative(&self.tmp, u, &mut self.k3);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        f.derivative(&self.tmp, u, &mut self.k4);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// First violated limit at `(x, u)`, evaluated on noise-free values.
pub(crate) fn check_constraints(
    plant: &PlantDescriptor,
    x: &[f64],
    u: &[f64],
    y: &mut Vec<f64>,
) -> Option<(String, Bound, f64, f64)> {
    if plant.constraints().is_empty() {
        return None;
    }
    let mut have_y = false;
    for c in plant.constraints() {
        let value = match c.variable {
            Monitored::State(i) => x[i],
            Monitored::Output(i) => {
                if !have_y {
                    y.resize(plant.n_outputs(), 0.0);
                    plant.dynamics().output(x, u, y);
                    have_y = true;
                }
                y[i]
            }
        };
        let label = plant.monitored_label(c.variable).to_string();
        if value < c.low {
            return Some((label, Bound::Low, c.low, value));
        }
        if value > c.high {
            return Some((label, Bound::High, c.high, value));
        }
    }
    None
}

/// Number of solver steps between samples of a channel with `period`.
fn stride_for(period: f64, step: f64) -> Result<u64, PlantError> {
    if period == 0.0 {
        return Ok(1);
    }
    let ratio = period / step;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > GRID_SLACK * ratio.max(1.0) {
        return Err(PlantError::Options(format!(
            "sample period {period} h is not an integer multiple of the step {step} h"
        )));
    }
    Ok(k as u64)
}

/// Integrates the plant from `x0` under `schedule` with fixed-step RK4,
/// sampling each output channel on its own period grid.
///
/// Samples include `t = 0`. Limits are checked after every step on the
/// noise-free state and outputs; the first violation ends the run and no
/// sample is recorded at or after that instant. Noise draws come from a
/// ChaCha8 stream seeded with `opts.seed`, so reruns are bit-identical.
pub fn simulate(
    plant: &PlantDescriptor,
    schedule: &InputSchedule,
    x0: &[f64],
    opts: &SimOptions,
) -> Result<SimulationTrace, PlantError> {
    let (n, p) = (plant.n_states(), plant.n_outputs());
    if schedule.n_inputs() != plant.n_inputs() {
        return Err(PlantError::Schedule(format!(
            "schedule has {} inputs, plant expects {}",
            schedule.n_inputs(),
            plant.n_inputs()
        )));
    }
    if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
        return Err(PlantError::Options(format!(
            "initial state must be {n} finite values"
        )));
    }
    let step = opts.step;
    if !(step.is_finite() && step > 0.0) {
        return Err(PlantError::Options(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(opts.duration.is_finite() && opts.duration >= step) {
        return Err(PlantError::Options(format!(
            "duration must be at least one step, got {}",
            opts.duration
        )));
    }
    let strides = plant
        .sample_periods()
        .iter()
        .map(|&per| stride_for(per, step))
        .collect::<Result<Vec<_>, _>>()?;

    let n_full = (opts.duration / step * (1.0 + GRID_SLACK)).floor() as u64;
    let partial = opts.duration - n_full as f64 * step > GRID_SLACK * step;
    let snap = GRID_SLACK * step;

    let dynamics = plant.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rk = Rk4::new(n);
    let mut x = x0.to_vec();
    let mut y = vec![0.0; p];
    let mut y_check = Vec::new();
    let mut channels: Vec<ChannelSeries> = (0..p)
        .map(|j| ChannelSeries {
            label: plant.labels().outputs[j].clone(),
            period: plant.sample_periods()[j],
            times: Vec::new(),
            values: Vec::new(),
        })
        .collect();

    let mut record =
        |k: u64, x: &[f64], u: &[f64], y: &mut [f64], channels: &mut [ChannelSeries]| {
            let due: Vec<usize> = (0..p).filter(|&j| k.is_multiple_of(strides[j])).collect();
            if due.is_empty() {
                return;
            }
            dynamics.output(x, u, y);
            let t = k as f64 * step;
            for j in due {
                let std = plant.noise_std()[j];
                let noise = if opts.noise && std > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    std * z
                } else {
                    0.0
                };
                channels[j].times.push(t);
                channels[j].values.push(y[j] + noise);
            }
        };

    let finish = |channels, end_time, termination, x: Vec<f64>| SimulationTrace {
        plant: plant.name().to_string(),
        channels,
        step,
        seed: opts.seed,
        duration: opts.duration,
        end_time,
        noise: opts.noise,
        termination,
        final_state: x,
    };

    let u0 = schedule.at(0.0);
    if let Some((variable, bound, limit, value)) = check_constraints(plant, &x, u0, &mut y_check) {
        let term = Termination::Shutdown {
            time: 0.0,
            variable,
            bound,
            limit,
            value,
        };
        return Ok(finish(channels, 0.0, term, x));
    }
    record(0, &x, u0, &mut y, &mut channels);

    let total = n_full + u64::from(partial);
    let mut cuts = Vec::new();
    for k in 0..total {
        let t0 = k as f64 * step;
        let t1 = if k < n_full {
            (k + 1) as f64 * step
        } else {
            opts.duration
        };
        cuts.clear();
        cuts.push(t0);
        cuts.extend(schedule.boundaries_within(t0 + snap, t1 - snap));
        cuts.push(t1);
        for w in cuts.windows(2) {
            let u = schedule.at(0.5 * (w[0] + w[1]));
            rk.step(dynamics, &mut x, u, w[1] - w[0]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(PlantError::Divergence { time: t1 });
        }
        let u1 = schedule.at(t1 + snap);
        if let Some((variable, bound, limit, value)) =
            check_constraints(plant, &x, u1, &mut y_check)
        {
            let term = Termination::Shutdown {
                time: t1,
                variable,
                bound,
                limit,
                value,
            };
            return Ok(finish(channels, t1, term, x));
        }
        if k < n_full {
            record(k + 1, &x, u1, &mut y, &mut channels);
        }
    }
    Ok(finish(channels, opts.duration, Termination::Completed, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plants::FnDynamics;

    fn decay(period: f64, noise: f64) -> PlantDescriptor {
        PlantDescriptor::builder(
            "decay",
            FnDynamics::state_output(1, 1, |x, u, dx| dx[0] = u[0] - x[0]),
            vec![0.0],
            vec![0.0],
        )
        .sample_periods(vec![period])
        .noise_std(vec![noise])
        .build()
        .unwrap()
    }

    #[test]
    fn first_order_step_response() {
        let p = decay(0.0, 0.0);
        let s = InputSchedule::constant(vec![1.0]).unwrap();
        let tr = simulate(&p, &s, &[0.0], &SimOptions::new(1.0, 0).with_step(1e-3)).unwrap();
        let last = *tr.channels[0].values.last().unwrap();
        assert!((last - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert_eq!(tr.channels[0].len(), 1001);
        assert_eq!(tr.termination, Termination::Completed);
    }

    #[test]
    fn sample_counts_follow_period() {
        let p = decay(0.25, 0.0);
        let s = InputSchedule::constant(vec![1.0]).unwrap();
        let tr = simulate(&p, &s, &[0.0], &SimOptions::new(1.0, 0)).unwrap();
        assert_eq!(tr.channels[0].times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn period_must_divide_into_steps() {
        let p = decay(0.00015, 0.0);
        let s = InputSchedule::constant(vec![1.0]).unwrap();
        assert!(matches!(
            simulate(&p, &s, &[0.0], &SimOptions::new(1.0, 0)),
            Err(PlantError::Options(_))
        ));
    }

    #[test]
    fn noise_is_seeded() {
        let p = decay(0.01, 0.5);
        let s = InputSchedule::constant(vec![1.0]).unwrap();
        let a = simulate(&p, &s, &[0.0], &SimOptions::new(0.5, 7)).unwrap();
        let b = simulate(&p, &s, &[0.0], &SimOptions::new(0.5, 7)).unwrap();
        let c = simulate(&p, &s, &[0.0], &SimOptions::new(0.5, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.channels[0].values, c.channels[0].values);
        let quiet = simulate(&p, &s, &[0.0], &SimOptions::new(0.5, 7).without_noise()).unwrap();
        assert_eq!(a.final_state, quiet.final_state);
    }

    #[test]
    fn divergence_is_reported() {
        let p = PlantDescriptor::builder(
            "blowup",
            FnDynamics::state_output(1, 1, |x, _u, dx| dx[0] = x[0] * x[0]),
            vec![1.0],
            vec![0.0],
        )
        .build()
        .unwrap();
        let s = InputSchedule::constant(vec![0.0]).unwrap();
        let r = simulate(&p, &s, &[1.0], &SimOptions::new(2.0, 0).with_step(1e-2));
        assert!(matches!(r, Err(PlantError::Divergence { .. })));
    }

    #[test]
    fn partial_final_step_reaches_duration() {
        let p = decay(0.0, 0.0);
        let s = InputSchedule::constant(vec![1.0]).unwrap();
        let tr = simulate(&p, &s, &[0.0], &SimOptions::new(0.1005, 0).with_step(1e-3)).unwrap();
        assert!((tr.final_state[0] - (1.0 - (-0.1005f64).exp())).abs() < 1e-12);
        assert_eq!(tr.channels[0].len(), 101);
    }
}
