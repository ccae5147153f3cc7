//! Black-box nonlinear plants and the simulation engine that drives them.
//!
//! A plant exposes only two maps, the vector field `f(x, u)` and the
//! noise-free output map `h(x, u)`. Everything else a real process adds on
//! top (measurement noise, per-channel sampling periods, hard shutdown
//! limits) lives in [`PlantDescriptor`] and is applied by [`simulate`].

mod catalog;
mod schedule;
mod simulate;
mod trace_io;
mod trim;

pub use catalog::{
    bundled_plants, cstr, linear_demo, plant_by_name, rsr, CstrParams, RsrParams, PLANT_NAMES,
};
pub use schedule::{InputSchedule, Segment};
pub(crate) use simulate::{check_constraints, Rk4};
pub use simulate::{
    simulate, Bound, ChannelSeries, SimOptions, SimulationTrace, Termination, DEFAULT_STEP,
};
pub use trace_io::{write_trace, TraceGroup, TraceSidecar};
pub use trim::{find_equilibrium, TRIM_TOLERANCE};

use crate::linearize::FdError;
use crate::numerics::RealMatrix;
use crate::statespace::ChannelLabels;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid plant: {0}")]
    Invalid(String),
    #[error("invalid input schedule: {0}")]
    Schedule(String),
    #[error("invalid simulation options: {0}")]
    Options(String),
    #[error("state became non-finite at t = {time} h")]
    Divergence { time: f64 },
    #[error("trim did not converge; best residual {best_residual:e}")]
    TrimFailure { best_residual: f64 },
    #[error("Newton Jacobian is singular at column {column}")]
    SingularJacobian { column: usize },
    #[error(transparent)]
    Jacobian(#[from] FdError),
    #[error("io: {0}")]
    Io(String),
}

/// The two maps a black-box plant exposes. Implementations must be callable
/// from several threads at once.
pub trait PlantDynamics: Send + Sync {
    fn n_states(&self) -> usize;
    fn n_inputs(&self) -> usize;
    fn n_outputs(&self) -> usize;
    /// `dx ← f(x, u)`.
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]);
    /// `y ← h(x, u)`, noise-free.
    fn output(&self, x: &[f64], u: &[f64], y: &mut [f64]);

    fn eval_derivative(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.n_states()];
        self.derivative(x, u, &mut dx);
        dx
    }

    fn eval_output(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_outputs()];
        self.output(x, u, &mut y);
        y
    }
}

type VectorField = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

/// Plant dynamics assembled from two closures.
pub struct FnDynamics {
    n: usize,
    m: usize,
    p: usize,
    f: Box<VectorField>,
    h: Box<VectorField>,
}

impl FnDynamics {
    pub fn new(
        n_states: usize,
        n_inputs: usize,
        n_outputs: usize,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        h: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            n: n_states,
            m: n_inputs,
            p: n_outputs,
            f: Box::new(f),
            h: Box::new(h),
        }
    }

    /// Outputs are the full state.
    pub fn state_output(
        n_states: usize,
        n_inputs: usize,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self::new(n_states, n_inputs, n_states, f, |x, _u, y| {
            y.copy_from_slice(x)
        })
    }
}

impl PlantDynamics for FnDynamics {
    fn n_states(&self) -> usize {
        self.n
    }
    fn n_inputs(&self) -> usize {
        self.m
    }
    fn n_outputs(&self) -> usize {
        self.p
    }
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        (self.f)(x, u, dx)
    }
    fn output(&self, x: &[f64], u: &[f64], y: &mut [f64]) {
        (self.h)(x, u, y)
    }
}

/// A linear time-invariant system hidden behind the black-box interface.
#[derive(Clone, Debug)]
pub struct LtiDynamics {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
}

fn gemv_acc(m: &RealMatrix, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o += m.row(i).iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl PlantDynamics for LtiDynamics {
    fn n_states(&self) -> usize {
        self.a.rows()
    }
    fn n_inputs(&self) -> usize {
        self.b.cols()
    }
    fn n_outputs(&self) -> usize {
        self.c.rows()
    }
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        dx.fill(0.0);
        gemv_acc(&self.a, x, dx);
        gemv_acc(&self.b, u, dx);
    }
    fn output(&self, x: &[f64], u: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        gemv_acc(&self.c, x, y);
        gemv_acc(&self.d, u, y);
    }
}

/// Variable watched by a shutdown limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monitored {
    State(usize),
    Output(usize),
}

/// Hard operating limit; leaving `[low, high]` stops the simulation.
/// Either bound may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub variable: Monitored,
    pub low: f64,
    pub high: f64,
}

/// Nominal operating point. `y` is always `h(x, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NominalPoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

/// A black-box plant plus its measurement and safety layer.
#[derive(Clone)]
pub struct PlantDescriptor {
    name: String,
    dynamics: Arc<dyn PlantDynamics>,
    labels: ChannelLabels,
    noise_std: Vec<f64>,
    sample_periods: Vec<f64>,
    constraints: Vec<Constraint>,
    nominal: NominalPoint,
}

impl fmt::Debug for PlantDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantDescriptor")
            .field("name", &self.name)
            .field("n_states", &self.n_states())
            .field("n_inputs", &self.n_inputs())
            .field("n_outputs", &self.n_outputs())
            .field("noise_std", &self.noise_std)
            .field("sample_periods", &self.sample_periods)
            .field("constraints", &self.constraints)
            .finish()
    }
}

impl PlantDescriptor {
    /// Starts a descriptor with generic labels, no noise, every output
    /// sampled at the solver step and no constraints.
    pub fn builder(
        name: impl Into<String>,
        dynamics: impl PlantDynamics + 'static,
        x_nom: Vec<f64>,
        u_nom: Vec<f64>,
    ) -> PlantBuilder {
        let dynamics: Arc<dyn PlantDynamics> = Arc::new(dynamics);
        let (n, m, p) = (
            dynamics.n_states(),
            dynamics.n_inputs(),
            dynamics.n_outputs(),
        );
        PlantBuilder {
            name: name.into(),
            labels: ChannelLabels::generic(n, m, p),
            noise_std: vec![0.0; p],
            sample_periods: vec![0.0; p],
            constraints: Vec::new(),
            x_nom,
            u_nom,
            dynamics,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dynamics(&self) -> &dyn PlantDynamics {
        self.dynamics.as_ref()
    }
    pub fn n_states(&self) -> usize {
        self.dynamics.n_states()
    }
    pub fn n_inputs(&self) -> usize {
        self.dynamics.n_inputs()
    }
    pub fn n_outputs(&self) -> usize {
        self.dynamics.n_outputs()
    }
    pub fn labels(&self) -> &ChannelLabels {
        &self.labels
    }
    pub fn noise_std(&self) -> &[f64] {
        &self.noise_std
    }
    pub fn sample_periods(&self) -> &[f64] {
        &self.sample_periods
    }
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }
    pub fn nominal(&self) -> &NominalPoint {
        &self.nominal
    }

    /// Name of a monitored variable, taken from the channel labels.
    pub fn monitored_label(&self, v: Monitored) -> &str {
        match v {
            Monitored::State(i) => &self.labels.states[i],
            Monitored::Output(i) => &self.labels.outputs[i],
        }
    }

    /// Copy with measurement noise switched off on every channel.
    pub fn noise_free(&self) -> Self {
        let mut p = self.clone();
        p.noise_std.iter_mut().for_each(|s| *s = 0.0);
        p
    }
}

pub struct PlantBuilder {
    name: String,
    dynamics: Arc<dyn PlantDynamics>,
    labels: ChannelLabels,
    noise_std: Vec<f64>,
    sample_periods: Vec<f64>,
    constraints: Vec<Constraint>,
    x_nom: Vec<f64>,
    u_nom: Vec<f64>,
}

impl PlantBuilder {
    pub fn labels(mut self, labels: ChannelLabels) -> Self {
        self.labels = labels;
        self
    }
    pub fn noise_std(mut self, std: Vec<f64>) -> Self {
        self.noise_std = std;
        self
    }
    pub fn sample_periods(mut self, periods: Vec<f64>) -> Self {
        self.sample_periods = periods;
        self
    }
    pub fn constraint(mut self, variable: Monitored, low: f64, high: f64) -> Self {
        self.constraints.push(Constraint {
            variable,
            low,
            high,
        });
        self
    }

    pub fn build(self) -> Result<PlantDescriptor, PlantError> {
        let d = &self.dynamics;
        let (n, m, p) = (d.n_states(), d.n_inputs(), d.n_outputs());
        let invalid = |msg: String| Err(PlantError::Invalid(msg));
        if n == 0 || m == 0 || p == 0 {
            return invalid(format!(
                "dimensions must be positive, got n={n} m={m} p={p}"
            ));
        }
        if self.x_nom.len() != n || self.u_nom.len() != m {
            return invalid(format!(
                "nominal point sized ({}, {}), expected ({n}, {m})",
                self.x_nom.len(),
                self.u_nom.len()
            ));
        }
        if self.x_nom.iter().chain(&self.u_nom).any(|v| !v.is_finite()) {
            return invalid("nominal point must be finite".into());
        }
        if self.labels.states.len() != n
            || self.labels.inputs.len() != m
            || self.labels.outputs.len() != p
        {
            return invalid("label counts do not match plant dimensions".into());
        }
        if self.noise_std.len() != p || self.noise_std.iter().any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return invalid("noise standard deviations must be p finite values >= 0".into());
        }
        if self.sample_periods.len() != p
            || self
                .sample_periods
                .iter()
                .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return invalid("sample periods must be p finite values >= 0".into());
        }
        for c in &self.constraints {
            let in_range = match c.variable {
                Monitored::State(i) => i < n,
                Monitored::Output(i) => i < p,
            };
            if !in_range {
                return invalid(format!(
                    "constraint on out-of-range variable {:?}",
                    c.variable
                ));
            }
            if c.low.is_nan() || c.high.is_nan() || c.low >= c.high {
                return invalid(format!(
                    "constraint bounds must satisfy low < high, got [{}, {}]",
                    c.low, c.high
                ));
            }
        }
        let y_nom = d.eval_output(&self.x_nom, &self.u_nom);
        if y_nom.iter().any(|v| !v.is_finite()) {
            return invalid("output map is non-finite at the nominal point".into());
        }
        Ok(PlantDescriptor {
            name: self.name,
            dynamics: self.dynamics,
            labels: self.labels,
            noise_std: self.noise_std,
            sample_periods: self.sample_periods,
            constraints: self.constraints,
            nominal: NominalPoint {
                x: self.x_nom,
                u: self.u_nom,
                y: y_nom,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_plant() -> PlantBuilder {
        PlantDescriptor::builder(
            "scalar",
            FnDynamics::state_output(1, 1, |x, u, dx| dx[0] = u[0] - x[0]),
            vec![1.0],
            vec![1.0],
        )
    }

    #[test]
    fn builder_validates_invariants() {
        assert!(scalar_plant().build().is_ok());
        assert!(scalar_plant().noise_std(vec![-1.0]).build().is_err());
        assert!(scalar_plant()
            .sample_periods(vec![0.1, 0.2])
            .build()
            .is_err());
        assert!(scalar_plant()
            .constraint(Monitored::State(0), 1.0, 1.0)
            .build()
            .is_err());
        assert!(scalar_plant()
            .constraint(Monitored::Output(3), 0.0, 1.0)
            .build()
            .is_err());
        assert!(scalar_plant()
            .constraint(Monitored::State(0), f64::NEG_INFINITY, 0.5)
            .build()
            .is_ok());
        let bad_nominal = PlantDescriptor::builder(
            "x",
            FnDynamics::state_output(1, 1, |_, _, dx| dx[0] = 0.0),
            vec![1.0, 2.0],
            vec![0.0],
        );
        assert!(bad_nominal.build().is_err());
    }

    #[test]
    fn nominal_output_is_output_map() {
        let p = PlantDescriptor::builder(
            "sq",
            FnDynamics::new(
                1,
                1,
                1,
                |_, _, dx| dx[0] = 0.0,
                |x, u, y| y[0] = x[0] * x[0] + u[0],
            ),
            vec![3.0],
            vec![0.5],
        )
        .build()
        .unwrap();
        assert_eq!(p.nominal().y, vec![9.5]);
    }

    #[test]
    fn lti_dynamics_matches_matrices() {
        let lti = LtiDynamics {
            a: RealMatrix::from_rows(&[[-1.0, 2.0], [0.0, -3.0]]).unwrap(),
            b: RealMatrix::from_rows(&[[1.0], [2.0]]).unwrap(),
            c: RealMatrix::from_rows(&[[1.0, 1.0]]).unwrap(),
            d: RealMatrix::from_rows(&[[0.5]]).unwrap(),
        };
        assert_eq!(lti.eval_derivative(&[1.0, 1.0], &[2.0]), vec![3.0, 1.0]);
        assert_eq!(lti.eval_output(&[1.0, 1.0], &[2.0]), vec![3.0]);
    }
}
