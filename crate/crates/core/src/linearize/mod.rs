//! Linear models from black-box plants.
//!
//! The continuous linearizer differentiates the vector field and output
//! map directly. The discrete one differentiates the flow map `Φ`, the
//! state reached after holding `u` for one sampling period, so it never
//! goes through a continuous model or a matrix exponential.

mod fd;

pub use fd::{fd_jacobian, try_fd_jacobian, FdError, FdOptions, FdScheme};

use crate::numerics::RealMatrix;
use crate::plants::{find_equilibrium, PlantDescriptor, PlantError};
use crate::statespace::{
    ContinuousLinearModel, DiscreteLinearModel, LinearModel, ModelDocument, ModelMetadata,
    OperatingPointRecord, StateSpaceError,
};
use thiserror::Error;

/// Largest internal RK4 step used when integrating the flow map, in hours.
pub const FLOW_MAP_MAX_STEP: f64 = 1e-4;
/// Residual above which the operating point is reported as non-equilibrium.
pub const RESIDUAL_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearizeError {
    #[error(transparent)]
    Fd(#[from] FdError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
    #[error("operating point has wrong size or non-finite entries: {0}")]
    OperatingPoint(String),
    #[error("shutdown on {variable} at {time} h inside the sampling window")]
    ShutdownInWindow { time: f64, variable: String },
    #[error("flow map diverged at {time} h inside the sampling window")]
    Divergence { time: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSource {
    DeclaredNominal,
    Trimmed,
    User,
}

impl PointSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PointSource::DeclaredNominal => "declared-nominal",
            PointSource::Trimmed => "trimmed",
            PointSource::User => "user",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatingPoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub source: PointSource,
}

impl OperatingPoint {
    pub fn nominal(plant: &PlantDescriptor) -> Self {
        Self {
            x: plant.nominal().x.clone(),
            u: plant.nominal().u.clone(),
            source: PointSource::DeclaredNominal,
        }
    }

    /// Equilibrium at input `u`, found by Newton from `x_guess`.
    pub fn trimmed(
        plant: &PlantDescriptor,
        u: Vec<f64>,
        x_guess: &[f64],
    ) -> Result<Self, PlantError> {
        let x = find_equilibrium(plant, &u, x_guess)?;
        Ok(Self {
            x,
            u,
            source: PointSource::Trimmed,
        })
    }

    pub fn user(x: Vec<f64>, u: Vec<f64>) -> Self {
        Self {
            x,
            u,
            source: PointSource::User,
        }
    }

    fn check(&self, plant: &PlantDescriptor) -> Result<(), LinearizeError> {
        if self.x.len() != plant.n_states() || self.u.len() != plant.n_inputs() {
            return Err(LinearizeError::OperatingPoint(format!(
                "got ({}, {}), plant has ({}, {})",
                self.x.len(),
                self.u.len(),
                plant.n_states(),
                plant.n_inputs()
            )));
        }
        if self.x.iter().chain(&self.u).any(|v| !v.is_finite()) {
            return Err(LinearizeError::OperatingPoint("non-finite entry".into()));
        }
        Ok(())
    }
}

/// A linear model together with the record of how it was produced.
#[derive(Clone, Debug)]
pub struct Linearization<M> {
    pub model: M,
    pub metadata: ModelMetadata,
}

impl<M: Clone + Into<LinearModel>> Linearization<M> {
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument::from_model(&self.model.clone().into(), Some(self.metadata.clone()))
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn split_jacobian(
    g: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>, LinearizeError>,
    op: &OperatingPoint,
    opts: &FdOptions,
) -> Result<(RealMatrix, RealMatrix), LinearizeError> {
    let jx = try_fd_jacobian(|z| g(z, &op.u), &op.x, opts)?;
    let ju = try_fd_jacobian(|w| g(&op.x, w), &op.u, opts)?;
    Ok((jx, ju))
}

fn output_jacobians(
    plant: &PlantDescriptor,
    op: &OperatingPoint,
    opts: &FdOptions,
) -> Result<(RealMatrix, RealMatrix), LinearizeError> {
    let f = plant.dynamics();
    split_jacobian(|x, u| Ok(f.eval_output(x, u)), op, opts)
}

fn metadata(
    plant: &PlantDescriptor,
    op: &OperatingPoint,
    opts: &FdOptions,
    method: &str,
    ts: Option<f64>,
    residual: Vec<f64>,
) -> ModelMetadata {
    let residual_norm = inf_norm(&residual);
    let mut warnings = Vec::new();
    if residual_norm > RESIDUAL_WARNING {
        warnings.push(format!(
            "operating point is not an equilibrium: residual inf-norm {residual_norm:e}; \
             the linear model omits this affine term"
        ));
    }
    ModelMetadata {
        method: method.into(),
        plant: Some(plant.name().to_string()),
        step_factor: opts.step_factor,
        step_floor: opts.floor,
        ts,
        operating_point: OperatingPointRecord {
            x: op.x.clone(),
            u: op.u.clone(),
            y: plant.dynamics().eval_output(&op.x, &op.u),
            source: op.source.as_str().into(),
        },
        residual,
        residual_norm,
        warnings,
    }
}

/// Continuous-time model `(∂f/∂x, ∂f/∂u, ∂h/∂x, ∂h/∂u)` at `op`.
pub fn linearize_ct(
    plant: &PlantDescriptor,
    op: &OperatingPoint,
    opts: &FdOptions,
) -> Result<Linearization<ContinuousLinearModel>, LinearizeError> {
    op.check(plant)?;
    let f = plant.dynamics();
    let (a, b) = split_jacobian(|x, u| Ok(f.eval_derivative(x, u)), op, opts)?;
    let (c, d) = output_jacobians(plant, op, opts)?;
    let model = ContinuousLinearModel::new(a, b, c, d)?.with_labels(plant.labels().clone())?;
    let residual = f.eval_derivative(&op.x, &op.u);
    Ok(Linearization {
        model,
        metadata: metadata(plant, op, opts, "ct-fd", None, residual),
    })
}

/// Flow map: the state after holding `u` for `ts` from `x`, integrated with
/// RK4 at a step of at most `min(1e-4, ts/10)`. Plant limits are checked
/// after every internal step.
pub fn flow_map(
    plant: &PlantDescriptor,
    x: &[f64],
    u: &[f64],
    ts: f64,
) -> Result<Vec<f64>, LinearizeError> {
    crate::statespace::validate_period(ts)?;
    let max_step = FLOW_MAP_MAX_STEP.min(ts / 10.0);
    let steps = (ts / max_step).ceil().max(1.0) as usize;
    let h = ts / steps as f64;
    let mut rk = crate::plants::Rk4::new(x.len());
    let mut z = x.to_vec();
    let mut y = Vec::new();
    for k in 1..=steps {
        rk.step(plant.dynamics(), &mut z, u, h);
        let t = k as f64 * h;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(LinearizeError::Divergence { time: t });
        }
        if let Some((variable, ..)) = crate::plants::check_constraints(plant, &z, u, &mut y) {
            return Err(LinearizeError::ShutdownInWindow { time: t, variable });
        }
    }
    Ok(z)
}

/// Discrete-time model from Jacobians of the flow map over one period
/// `ts`; `C` and `D` come from the output map as in [`linearize_ct`].
pub fn linearize_dt(
    plant: &PlantDescriptor,
    op: &OperatingPoint,
    ts: f64,
    opts: &FdOptions,
) -> Result<Linearization<DiscreteLinearModel>, LinearizeError> {
    op.check(plant)?;
    crate::statespace::validate_period(ts)?;
    let phi0 = flow_map(plant, &op.x, &op.u, ts)?;
    let (phi, gamma) = split_jacobian(|x, u| flow_map(plant, x, u, ts), op, opts)?;
    let (c, d) = output_jacobians(plant, op, opts)?;
    let model =
        DiscreteLinearModel::new(phi, gamma, c, d, ts)?.with_labels(plant.labels().clone())?;
    let residual = phi0.iter().zip(&op.x).map(|(p, x)| p - x).collect();
    Ok(Linearization {
        model,
        metadata: metadata(plant, op, opts, "dt-flowmap", Some(ts), residual),
    })
}
