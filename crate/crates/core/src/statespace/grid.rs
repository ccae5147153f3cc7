use super::StateSpaceError;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Logarithmic,
    Explicit,
}

/// Strictly increasing, positive, finite frequencies in rad/h.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    scale: GridScale,
}

impl FrequencyGrid {
    /// `points` logarithmically spaced values from `min` to `max` inclusive.
    pub fn logspace(min: f64, max: f64, points: usize) -> Result<Self, StateSpaceError> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
            return Err(StateSpaceError::Parameter(format!(
                "grid needs 0 < min < max, got [{min}, {max}]"
            )));
        }
        if points < 2 {
            return Err(StateSpaceError::Parameter(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        let (lo, hi) = (min.log10(), max.log10());
        let step = (hi - lo) / (points - 1) as f64;
        let mut values: Vec<f64> = (0..points)
            .map(|i| 10f64.powf(lo + step * i as f64))
            .collect();
        values[0] = min;
        values[points - 1] = max;
        let grid = Self::from_points(values)?;
        Ok(Self {
            scale: GridScale::Logarithmic,
            ..grid
        })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self, StateSpaceError> {
        if points.is_empty() {
            return Err(StateSpaceError::Parameter("empty frequency grid".into()));
        }
        if let Some(bad) = points.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(StateSpaceError::Parameter(format!(
                "grid frequencies must be positive and finite, got {bad}"
            )));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(StateSpaceError::Parameter(
                "grid frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            points,
            scale: GridScale::Explicit,
        })
    }

    /// Default sweep: 200 log-spaced points over `[1e-4, 1e4]` rad/h.
    pub fn default_sweep() -> Self {
        Self::logspace(1e-4, 1e4, 200).expect("static grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn scale(&self) -> GridScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Drops points above `limit`; returns the kept grid and how many were
    /// removed. Fails if nothing is left.
    pub fn clip_to(&self, limit: f64) -> Result<(Self, usize), StateSpaceError> {
        let kept: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|&w| w <= limit)
            .collect();
        let dropped = self.points.len() - kept.len();
        if kept.is_empty() {
            return Err(StateSpaceError::Parameter(format!(
                "no grid point lies below {limit} rad/h"
            )));
        }
        Ok((
            Self {
                points: kept,
                scale: self.scale,
            },
            dropped,
        ))
    }
}
