//! Descriptive summaries of a history.

use serde::{Deserialize, Serialize};

use crate::event::{EventHistory, EventType};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); absent for n < 2.
    pub sd: Option<f64>,
}

impl Moments {
    fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.len() > 1)
            .then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Some(Self { mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSummary {
    pub count: usize,
    /// Differences between consecutive events of this type.
    pub gap: Option<Moments>,
    pub duration: Option<Moments>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub type1: TypeSummary,
    pub type2: TypeSummary,
}

impl Summary {
    pub fn of_type(&self, ty: EventType) -> &TypeSummary {
        match ty {
            EventType::One => &self.type1,
            EventType::Two => &self.type2,
        }
    }
}

/// Per-type counts and gap/duration moments. Gaps are taken between
/// consecutive events of a type, so the interval before a type's first
/// event (whose start is not observed in a data log) is not included.
pub fn summarize(history: &EventHistory) -> Summary {
    let per = |ty: EventType| {
        let evs: Vec<_> = history
            .events()
            .iter()
            .filter(|e| e.event_type == ty)
            .collect();
        let gaps: Vec<f64> = evs.windows(2).map(|w| w[1].time - w[0].time).collect();
        let durations: Vec<f64> = evs.iter().map(|e| e.duration).collect();
        TypeSummary {
            count: evs.len(),
            gap: Moments::of(&gaps),
            duration: Moments::of(&durations),
        }
    };
    Summary {
        n: history.len(),
        type1: per(EventType::One),
        type2: per(EventType::Two),
    }
}
