use super::DiagnosticsError;
use crate::numerics::singular_values;
use crate::statespace::{FrequencyGrid, LinearModel, ModelKind, StateSpaceError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Singular values at or below the threshold do not count towards rank.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum RankTolerance {
    /// `max(p, m) · ε · σ_max`.
    #[default]
    Default,
    Absolute(f64),
}

impl RankTolerance {
    pub fn threshold(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        match *self {
            RankTolerance::Default => rows.max(cols) as f64 * f64::EPSILON * sigma_max,
            RankTolerance::Absolute(t) => t,
        }
    }
}

/// Number of singular values strictly above the tolerance. `sigma` must be
/// sorted in descending order and nonnegative; `rows × cols` is the shape
/// of the matrix they came from.
pub fn numerical_rank(
    sigma: &[f64],
    rows: usize,
    cols: usize,
    tol: RankTolerance,
) -> Result<usize, DiagnosticsError> {
    if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(DiagnosticsError::Contract(
            "singular values must be finite and nonnegative".into(),
        ));
    }
    if sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(DiagnosticsError::Contract(
            "singular values must be sorted in descending order".into(),
        ));
    }
    if let RankTolerance::Absolute(t) = tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(DiagnosticsError::Contract(format!(
                "absolute rank threshold must be finite and nonnegative, got {t}"
            )));
        }
    }
    let Some(&smax) = sigma.first() else {
        return Ok(0);
    };
    if smax == 0.0 {
        return Ok(0);
    }
    let thr = tol.threshold(smax, rows, cols);
    Ok(sigma.iter().take_while(|&&s| s > thr).count())
}

/// One evaluation point. A gap marks a frequency where the response is
/// undefined because `sI − A` is singular there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub sigma_max: Option<f64>,
    pub sigma_min: Option<f64>,
    /// `σ_max / σ_min`; infinite when `σ_min = 0`.
    pub gamma: Option<f64>,
    pub rank: Option<usize>,
    pub gap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    pub kind: ModelKind,
    pub ts: Option<f64>,
    pub rank_tolerance: RankTolerance,
    pub points: Vec<SweepPoint>,
}

impl FrequencySweep {
    pub fn gaps(&self) -> usize {
        self.points.iter().filter(|p| p.gap).count()
    }

    pub fn max_gamma(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.gamma).reduce(f64::max)
    }

    pub fn min_rank(&self) -> Option<usize> {
        self.points.iter().filter_map(|p| p.rank).min()
    }

    pub fn max_rank(&self) -> Option<usize> {
        self.points.iter().filter_map(|p| p.rank).max()
    }

    /// Frequencies at which the rank differs from the previous non-gap point.
    pub fn rank_changes(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut prev = None;
        for p in &self.points {
            if let Some(r) = p.rank {
                if prev.is_some_and(|q| q != r) {
                    out.push(p.omega);
                }
                prev = Some(r);
            }
        }
        out
    }
}

fn evaluate(
    model: &LinearModel,
    omega: f64,
    tol: RankTolerance,
) -> Result<SweepPoint, DiagnosticsError> {
    let g = match model.frequency_response(omega) {
        Ok(g) => g,
        Err(StateSpaceError::Singular { .. }) => {
            return Ok(SweepPoint {
                omega,
                sigma_max: None,
                sigma_min: None,
                gamma: None,
                rank: None,
                gap: true,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let s = singular_values(&g)?;
    let (smax, smin) = (s[0], s[s.len() - 1]);
    let gamma = if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    };
    Ok(SweepPoint {
        omega,
        sigma_max: Some(smax),
        sigma_min: Some(smin),
        gamma: Some(gamma),
        rank: Some(numerical_rank(&s, g.rows(), g.cols(), tol)?),
        gap: false,
    })
}

/// Singular-value sweep of the frequency response over `grid`. Grid points
/// are evaluated in parallel; the result keeps grid order. Discrete models
/// reject frequencies above Nyquist.
pub fn condition_sweep(
    model: &LinearModel,
    grid: &FrequencyGrid,
    tol: RankTolerance,
) -> Result<FrequencySweep, DiagnosticsError> {
    if grid.is_empty() {
        return Err(DiagnosticsError::Parameter("empty frequency grid".into()));
    }
    let points = grid
        .points()
        .par_iter()
        .map(|&w| evaluate(model, w, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrequencySweep {
        kind: model.kind(),
        ts: model.ts(),
        rank_tolerance: tol,
        points,
    })
}

/// Same records as [`condition_sweep`]; read through
/// [`FrequencySweep::max_rank`] and [`FrequencySweep::rank_changes`].
pub fn rank_sweep(
    model: &LinearModel,
    grid: &FrequencyGrid,
    tol: RankTolerance,
) -> Result<FrequencySweep, DiagnosticsError> {
    condition_sweep(model, grid, tol)
}
