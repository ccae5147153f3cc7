//! Reliability checks for linear models: eigenvalue reports, deviation
//! metrics against nonlinear simulation, and frequency sweeps of the
//! condition number and numerical rank of the transfer function matrix.

mod compare;
mod deviation;
mod eigen;
mod sweep;

pub use compare::{
    compare_linearizations, AggregateRatio, CandidateModel, CompareReport, ErrorBar,
    ModelComparison, Scenario,
};
pub use deviation::{
    linearization_error_profile, nominal_deviation_profile, DeviationKind, DeviationProfile,
};
pub use eigen::{
    classify_ct, classify_dt, eigen_report, report_from_values, Classification, EigenCluster,
    EigenReport, EigenTolerances,
};
pub use sweep::{
    condition_sweep, numerical_rank, rank_sweep, FrequencySweep, RankTolerance, SweepPoint,
};

use crate::numerics::NumericsError;
use crate::plants::PlantError;
use crate::statespace::StateSpaceError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("nominal value of channel {channel} is zero; cannot normalize")]
    Normalization { channel: String },
    #[error("incompatible traces: {0}")]
    Comparison(String),
    #[error("channel {channel} has {samples} samples before shutdown; at least 2 are needed")]
    InsufficientData { channel: String, samples: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
    #[error(transparent)]
    Plant(#[from] PlantError),
}
