//! JSON model documents.
//!
//! ```json
//! {
//!   "kind": "discrete",
//!   "a": [[0.9]], "b": [[0.1]], "c": [[1.0]], "d": [[0.0]],
//!   "ts": 0.01,
//!   "labels": {"states": ["x1"], "inputs": ["u1"], "outputs": ["y1"]},
//!   "units": {"time": "h", "frequency": "rad/h"},
//!   "metadata": { ... }
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! bit-exact.

use super::{
    ChannelLabels, ContinuousLinearModel, DiscreteLinearModel, LinearModel, Quadruple,
    StateSpaceError, Units,
};
use crate::numerics::RealMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Continuous,
    Discrete,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Continuous => "continuous",
            ModelKind::Discrete => "discrete",
        })
    }
}

/// Operating point the model was linearized around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointRecord {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Noise-free outputs at `(x, u)`.
    pub y: Vec<f64>,
    /// `"declared-nominal"` or `"trimmed"`.
    pub source: String,
}

/// Provenance block written by the linearizers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    /// `"ct-fd"` or `"dt-flowmap"`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<String>,
    pub step_factor: f64,
    pub step_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<f64>,
    pub operating_point: OperatingPointRecord,
    /// Affine term dropped by the linearization: `f(x, u)` for continuous
    /// models, `Φ(x, u) − x` for discrete ones.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub kind: ModelKind,
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<f64>,
    pub labels: ChannelLabels,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ModelMetadata>,
}

impl ModelDocument {
    pub fn from_model(model: &LinearModel, metadata: Option<ModelMetadata>) -> Self {
        let (sys, labels, units, ts) = match model {
            LinearModel::Continuous(m) => (&m.sys, &m.labels, &m.units, None),
            LinearModel::Discrete(m) => (&m.sys, &m.labels, &m.units, Some(m.ts)),
        };
        Self {
            kind: model.kind(),
            a: sys.a.clone(),
            b: sys.b.clone(),
            c: sys.c.clone(),
            d: sys.d.clone(),
            ts,
            labels: labels.clone(),
            units: units.clone(),
            metadata,
        }
    }

    pub fn to_model(&self) -> Result<LinearModel, StateSpaceError> {
        let sys = Quadruple::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        )?;
        self.labels
            .validate(sys.n_states(), sys.n_inputs(), sys.n_outputs())?;
        Ok(match (self.kind, self.ts) {
            (ModelKind::Continuous, None) => LinearModel::Continuous(ContinuousLinearModel {
                sys,
                labels: self.labels.clone(),
                units: self.units.clone(),
            }),
            (ModelKind::Continuous, Some(_)) => {
                return Err(StateSpaceError::Format(
                    "continuous model must not carry ts".into(),
                ))
            }
            (ModelKind::Discrete, Some(ts)) => {
                super::validate_period(ts)?;
                LinearModel::Discrete(DiscreteLinearModel {
                    sys,
                    ts,
                    labels: self.labels.clone(),
                    units: self.units.clone(),
                })
            }
            (ModelKind::Discrete, None) => {
                return Err(StateSpaceError::Format("discrete model requires ts".into()))
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, StateSpaceError> {
        serde_json::from_str(text).map_err(|e| StateSpaceError::Format(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, StateSpaceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StateSpaceError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
