use super::{PlantError, SimulationTrace, Termination};
use crate::util::{csv_text, fmt_csv, write_atomic};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Channels sharing one sampling period, written to one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceGroup {
    pub file: String,
    pub period_h: f64,
    pub channels: Vec<String>,
    pub samples: usize,
}

/// JSON written next to the trace CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub plant: String,
    pub seed: u64,
    pub step: f64,
    pub duration: f64,
    pub end_time: f64,
    pub noise: bool,
    pub termination: Termination,
    pub final_state: Vec<f64>,
    pub groups: Vec<TraceGroup>,
}

fn group_file(stem: &str, period: f64) -> String {
    if period == 0.0 {
        format!("{stem}_step.csv")
    } else {
        format!("{stem}_{period}h.csv")
    }
}

/// Writes one CSV per distinct sampling period plus `<stem>.json`.
pub fn write_trace(
    trace: &SimulationTrace,
    dir: &Path,
    stem: &str,
) -> Result<TraceSidecar, PlantError> {
    let io = |e: std::io::Error| PlantError::Io(e.to_string());
    let mut periods: Vec<f64> = Vec::new();
    for c in &trace.channels {
        if !periods.contains(&c.period) {
            periods.push(c.period);
        }
    }
    let mut groups = Vec::new();
    for period in periods {
        let members: Vec<_> = trace
            .channels
            .iter()
            .filter(|c| c.period == period)
            .collect();
        let mut header = vec!["time_h".to_string()];
        header.extend(members.iter().map(|c| c.label.clone()));
        let times = &members[0].times;
        let rows = (0..times.len()).map(|i| {
            let mut row = vec![fmt_csv(times[i])];
            row.extend(members.iter().map(|c| fmt_csv(c.values[i])));
            row
        });
        let file = group_file(stem, period);
        write_atomic(&dir.join(&file), csv_text(&header, rows).as_bytes()).map_err(io)?;
        groups.push(TraceGroup {
            file,
            period_h: period,
            channels: members.iter().map(|c| c.label.clone()).collect(),
            samples: times.len(),
        });
    }
    let sidecar = TraceSidecar {
        plant: trace.plant.clone(),
        seed: trace.seed,
        step: trace.step,
        duration: trace.duration,
        end_time: trace.end_time,
        noise: trace.noise,
        termination: trace.termination.clone(),
        final_state: trace.final_state.clone(),
        groups,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes()).map_err(io)?;
    Ok(sidecar)
}
