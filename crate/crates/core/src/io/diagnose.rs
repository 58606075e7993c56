//! Cumulative-intensity diagnostics: model H_j(t) against observed N_j(t).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{CarpError, Result};
use crate::event::{EventHistory, EventType};
use crate::model::{cumulative_intensity, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub time: Vec<f64>,
    /// Estimated cumulative intensity per type.
    pub h: [Vec<f64>; 2],
    /// Observed counts per type. An event at the origin only starts the
    /// clock and is not counted.
    pub n: [Vec<usize>; 2],
}

impl DiagnosticSeries {
    pub fn terminal(&self, ty: EventType) -> (f64, usize) {
        let j = ty.index();
        (
            self.h[j].last().copied().unwrap_or(0.0),
            self.n[j].last().copied().unwrap_or(0),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "H1", "N1", "H2", "N2"])?;
        for k in 0..self.time.len() {
            w.write_record([
                format!("{:.6}", self.time[k]),
                format!("{:.6}", self.h[0][k]),
                self.n[0][k].to_string(),
                format!("{:.6}", self.h[1][k]),
                self.n[1][k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluate both series on the grid 0, step, 2·step, …, κ.
pub fn diagnose(model: &ModelSpec, history: &EventHistory, step: f64) -> Result<DiagnosticSeries> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CarpError::Domain(format!("grid step {step} must be positive")));
    }
    let kappa = history.termination();
    let cum = [
        cumulative_intensity(model, EventType::One, history, Some(step))?,
        cumulative_intensity(model, EventType::Two, history, Some(step))?,
    ];
    let mut time: Vec<f64> = (0..)
        .map(|k| k as f64 * step)
        .take_while(|&t| t < kappa)
        .collect();
    time.push(kappa);
    let anchor = history
        .events()
        .first()
        .filter(|_| history.is_anchor(0))
        .map(|e| e.event_type);
    let count = |ty: EventType, t: f64| {
        history.counting(ty, t) - usize::from(anchor == Some(ty))
    };
    let h = [
        time.iter().map(|&t| cum[0].eval(t)).collect(),
        time.iter().map(|&t| cum[1].eval(t)).collect(),
    ];
    let n = [
        time.iter().map(|&t| count(EventType::One, t)).collect(),
        time.iter().map(|&t| count(EventType::Two, t)).collect(),
    ];
    Ok(DiagnosticSeries { time, h, n })
}
