use super::PlantError;
use serde::{Deserialize, Serialize};

/// Input held constant from `start` until the next segment begins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub u: Vec<f64>,
}

/// Piecewise-constant input trajectory. The first segment starts at 0 and
/// start times strictly increase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct InputSchedule {
    segments: Vec<Segment>,
}

impl InputSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self, PlantError> {
        let bad = |m: String| Err(PlantError::Schedule(m));
        let Some(first) = segments.first() else {
            return bad("schedule has no segments".into());
        };
        if first.start != 0.0 {
            return bad(format!(
                "first segment must start at 0, got {}",
                first.start
            ));
        }
        let m = first.u.len();
        if m == 0 {
            return bad("input vectors must be non-empty".into());
        }
        for s in &segments {
            if s.u.len() != m {
                return bad(format!(
                    "segment at {} has {} inputs, expected {m}",
                    s.start,
                    s.u.len()
                ));
            }
            if !s.start.is_finite() || s.u.iter().any(|v| !v.is_finite()) {
                return bad(format!("segment at {} is not finite", s.start));
            }
        }
        if segments.windows(2).any(|w| w[1].start <= w[0].start) {
            return bad("segment start times must strictly increase".into());
        }
        Ok(Self { segments })
    }

    /// The same input for all time.
    pub fn constant(u: Vec<f64>) -> Result<Self, PlantError> {
        Self::new(vec![Segment { start: 0.0, u }])
    }

    /// `u0` until `at`, then `u0` with input `input` moved by `delta`.
    pub fn step(u0: Vec<f64>, input: usize, delta: f64, at: f64) -> Result<Self, PlantError> {
        if input >= u0.len() {
            return Err(PlantError::Schedule(format!(
                "step on input {input} but only {} inputs exist",
                u0.len()
            )));
        }
        if at == 0.0 {
            let mut u = u0;
            u[input] += delta;
            return Self::constant(u);
        }
        let mut u1 = u0.clone();
        u1[input] += delta;
        Self::new(vec![
            Segment { start: 0.0, u: u0 },
            Segment { start: at, u: u1 },
        ])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn n_inputs(&self) -> usize {
        self.segments[0].u.len()
    }

    /// Input in force at time `t`.
    pub fn at(&self, t: f64) -> &[f64] {
        let idx = self.segments.partition_point(|s| s.start <= t);
        &self.segments[idx.saturating_sub(1)].u
    }

    /// Segment start times lying strictly inside `(t0, t1)`.
    pub(crate) fn boundaries_within(&self, t0: f64, t1: f64) -> impl Iterator<Item = f64> + '_ {
        self.segments
            .iter()
            .map(|s| s.start)
            .filter(move |&b| b > t0 && b < t1)
    }
}

impl TryFrom<Vec<Segment>> for InputSchedule {
    type Error = PlantError;
    fn try_from(v: Vec<Segment>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<InputSchedule> for Vec<Segment> {
    fn from(s: InputSchedule) -> Self {
        s.segments
    }
}
