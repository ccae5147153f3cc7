use super::DiagnosticsError;
use crate::plants::SimulationTrace;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationKind {
    /// `(mean(y) − y_nom) · 100 / y_nom`, in percent.
    NominalPercent,
    /// `mean(y_lin − y_nl) / y_nom`, a plain fraction.
    LinearizationError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationProfile {
    pub kind: DeviationKind,
    pub channels: Vec<String>,
    pub values: Vec<f64>,
    /// Sum of absolute entries.
    pub aggregate: f64,
}

impl DeviationProfile {
    fn new(kind: DeviationKind, channels: Vec<String>, values: Vec<f64>) -> Self {
        let aggregate = values.iter().map(|v| v.abs()).sum();
        Self {
            kind,
            channels,
            values,
            aggregate,
        }
    }
}

fn check_nominal(trace: &SimulationTrace, nominal: &[f64]) -> Result<(), DiagnosticsError> {
    if nominal.len() != trace.channels.len() {
        return Err(DiagnosticsError::Comparison(format!(
            "{} nominal values for {} channels",
            nominal.len(),
            trace.channels.len()
        )));
    }
    for (c, &y) in trace.channels.iter().zip(nominal) {
        if y == 0.0 || !y.is_finite() {
            return Err(DiagnosticsError::Normalization {
                channel: c.label.clone(),
            });
        }
    }
    Ok(())
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len() as f64;
    v.sum::<f64>() / n
}

/// Relative deviation of each channel's mean from its nominal value, in
/// percent. Each channel is averaged over its own sample instants.
pub fn nominal_deviation_profile(
    trace: &SimulationTrace,
    nominal: &[f64],
) -> Result<DeviationProfile, DiagnosticsError> {
    check_nominal(trace, nominal)?;
    let mut values = Vec::with_capacity(nominal.len());
    for (c, &y) in trace.channels.iter().zip(nominal) {
        if c.values.is_empty() {
            return Err(DiagnosticsError::InsufficientData {
                channel: c.label.clone(),
                samples: 0,
            });
        }
        values.push((mean(c.values.iter().copied()) - y) * 100.0 / y);
    }
    let labels = trace.channels.iter().map(|c| c.label.clone()).collect();
    Ok(DeviationProfile::new(
        DeviationKind::NominalPercent,
        labels,
        values,
    ))
}

/// Mean pointwise difference between a linear-model trace and the nonlinear
/// trace, per channel, normalized by the nominal value. Both traces are cut
/// to the instants they share, so a nonlinear run that shut down early
/// bounds the comparison window.
pub fn linearization_error_profile(
    trace_lin: &SimulationTrace,
    trace_nl: &SimulationTrace,
    nominal: &[f64],
) -> Result<DeviationProfile, DiagnosticsError> {
    if trace_lin.channels.len() != trace_nl.channels.len() {
        return Err(DiagnosticsError::Comparison(format!(
            "traces have {} and {} channels",
            trace_lin.channels.len(),
            trace_nl.channels.len()
        )));
    }
    check_nominal(trace_nl, nominal)?;
    let mut values = Vec::with_capacity(nominal.len());
    for ((l, n), &y) in trace_lin
        .channels
        .iter()
        .zip(&trace_nl.channels)
        .zip(nominal)
    {
        if l.period != n.period {
            return Err(DiagnosticsError::Comparison(format!(
                "channel {} sampled every {} h in one trace and {} h in the other",
                n.label, l.period, n.period
            )));
        }
        let common = l.len().min(n.len());
        if common == 0 {
            return Err(DiagnosticsError::InsufficientData {
                channel: n.label.clone(),
                samples: 0,
            });
        }
        let slack = 1e-9 * trace_nl.step.max(trace_lin.step);
        if l.times[..common]
            .iter()
            .zip(&n.times[..common])
            .any(|(a, b)| (a - b).abs() > slack)
        {
            return Err(DiagnosticsError::Comparison(format!(
                "channel {} has different sample instants in the two traces",
                n.label
            )));
        }
        let diffs = l.values[..common]
            .iter()
            .zip(&n.values[..common])
            .map(|(a, b)| a - b);
        values.push(mean(diffs) / y);
    }
    let labels = trace_nl.channels.iter().map(|c| c.label.clone()).collect();
    Ok(DeviationProfile::new(
        DeviationKind::LinearizationError,
        labels,
        values,
    ))
}
