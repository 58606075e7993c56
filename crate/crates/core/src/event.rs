//! Event histories of a two-type recurrent system and the age/gap bookkeeping
//! derived from them.
//!
//! Times are hours on a common origin. The origin is the installation time
//! (`t = 0`); an event recorded exactly at the origin is allowed as the first
//! event and anchors the process (it resets ages but contributes no
//! likelihood factor). Every other event time must be strictly larger than its
//! predecessor.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CarpError, Result};

/// One of the two event types of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventType {
    One,
    Two,
}

impl EventType {
    pub const BOTH: [EventType; 2] = [EventType::One, EventType::Two];

    /// Zero-based component index into 2-vectors.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            EventType::One => 0,
            EventType::Two => 1,
        }
    }

    #[inline]
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }

    #[inline]
    pub fn other(self) -> EventType {
        match self {
            EventType::One => EventType::Two,
            EventType::Two => EventType::One,
        }
    }

    pub fn from_index(i: usize) -> Option<EventType> {
        match i {
            0 => Some(EventType::One),
            1 => Some(EventType::Two),
            _ => None,
        }
    }
}

impl TryFrom<i64> for EventType {
    type Error = CarpError;

    fn try_from(label: i64) -> Result<Self> {
        match label {
            1 => Ok(EventType::One),
            2 => Ok(EventType::Two),
            other => Err(CarpError::Domain(format!(
                "event type label {other} outside {{1, 2}}"
            ))),
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A single observed event.
///
/// `covariates` is the covariate snapshot in force just before `time`: the
/// most recent duration of each type strictly before this event (0 before a
/// type's first event). `duration` is this event's own duration and enters
/// the snapshot of every later event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub event_type: EventType,
    pub duration: f64,
    pub covariates: [f64; 2],
}

impl EventRecord {
    /// Snapshot in force after this event.
    pub fn covariates_after(&self) -> [f64; 2] {
        let mut x = self.covariates;
        x[self.event_type.index()] = self.duration;
        x
    }
}

/// Unvalidated event row, as it arrives from user input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEvent {
    pub time: f64,
    pub label: i64,
    pub duration: f64,
    pub covariates: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    NegativeTime,
    NonFiniteTime,
    NonStrictlyIncreasing,
    BadLabel(i64),
    NonFiniteCovariate,
    NegativeDuration,
    TerminationBeforeLastEvent,
}

/// A problem found by [`validate_history`]. Indices are 1-based event
/// positions; index 0 refers to the history as a whole.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.index;
        match &self.kind {
            ViolationKind::NegativeTime => write!(f, "negative time at index {i}"),
            ViolationKind::NonFiniteTime => write!(f, "non-finite time at index {i}"),
            ViolationKind::NonStrictlyIncreasing => {
                write!(f, "non-strictly-increasing at index {i}")
            }
            ViolationKind::BadLabel(l) => {
                write!(f, "event type {l} outside {{1, 2}} at index {i}")
            }
            ViolationKind::NonFiniteCovariate => {
                write!(f, "non-finite covariate at index {i}")
            }
            ViolationKind::NegativeDuration => {
                write!(f, "negative duration or covariate at index {i}")
            }
            ViolationKind::TerminationBeforeLastEvent => {
                write!(f, "termination time precedes last event")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<Violation>,
    /// Negative durations/covariates. Reported, not fatal.
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check the ordering, label, and termination invariants of a raw history.
pub fn validate_history(events: &[RawEvent], termination: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut prev: Option<f64> = None;
    for (k, e) in events.iter().enumerate() {
        let index = k + 1;
        let mut push = |kind| report.errors.push(Violation { index, kind });
        if !e.time.is_finite() {
            push(ViolationKind::NonFiniteTime);
        } else if e.time < 0.0 {
            push(ViolationKind::NegativeTime);
        } else if let Some(p) = prev {
            if e.time <= p {
                push(ViolationKind::NonStrictlyIncreasing);
            }
        }
        if !(e.label == 1 || e.label == 2) {
            push(ViolationKind::BadLabel(e.label));
        }
        if !e.covariates.iter().all(|c| c.is_finite()) || !e.duration.is_finite() {
            push(ViolationKind::NonFiniteCovariate);
        }
        if e.duration < 0.0 || e.covariates.iter().any(|&c| c < 0.0) {
            report.warnings.push(Violation {
                index,
                kind: ViolationKind::NegativeDuration,
            });
        }
        if e.time.is_finite() {
            prev = Some(e.time);
        }
    }
    let last = events
        .iter()
        .map(|e| e.time)
        .filter(|t| t.is_finite())
        .fold(0.0, f64::max);
    if !(termination >= last) {
        report.errors.push(Violation {
            index: 0,
            kind: ViolationKind::TerminationBeforeLastEvent,
        });
    }
    report
}

/// A validated, immutable history of events up to the termination time κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventHistory {
    events: Vec<EventRecord>,
    termination: f64,
}

impl EventHistory {
    pub fn empty() -> Self {
        Self {
            events: Vec::new(),
            termination: 0.0,
        }
    }

    /// Build from raw rows, validating every invariant.
    pub fn from_raw(events: &[RawEvent], termination: f64) -> Result<Self> {
        let report = validate_history(events, termination);
        if !report.is_ok() {
            return Err(CarpError::InvalidHistory(report.errors));
        }
        for w in &report.warnings {
            log::warn!("{w}");
        }
        let events = events
            .iter()
            .map(|e| EventRecord {
                time: e.time,
                event_type: EventType::try_from(e.label).expect("label validated"),
                duration: e.duration,
                covariates: e.covariates,
            })
            .collect();
        Ok(Self {
            events,
            termination,
        })
    }

    /// Build from `(time, type, duration)` rows already in time order,
    /// deriving each event's covariate snapshot from the durations of the
    /// events before it.
    pub fn from_timed_durations(
        rows: impl IntoIterator<Item = (f64, EventType, f64)>,
        termination: Option<f64>,
    ) -> Result<Self> {
        let mut snapshot = [0.0; 2];
        let mut raw = Vec::new();
        for (time, ty, duration) in rows {
            raw.push(RawEvent {
                time,
                label: ty.label() as i64,
                duration,
                covariates: snapshot,
            });
            snapshot[ty.index()] = duration;
        }
        let kappa = termination.unwrap_or_else(|| raw.last().map_or(0.0, |e| e.time));
        Self::from_raw(&raw, kappa)
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn termination(&self) -> f64 {
        self.termination
    }

    /// Number of events of `ty` (n_j).
    pub fn count_of(&self, ty: EventType) -> usize {
        self.events.iter().filter(|e| e.event_type == ty).count()
    }

    /// N_j(t): number of type-`ty` events at or before `t`.
    pub fn counting(&self, ty: EventType, t: f64) -> usize {
        self.events
            .iter()
            .take_while(|e| e.time <= t)
            .filter(|e| e.event_type == ty)
            .count()
    }

    /// Covariate snapshot after the first `i` events (`i = 0` is the
    /// baseline `(0, 0)`).
    pub fn snapshot_after(&self, i: usize) -> [f64; 2] {
        if i == 0 {
            [0.0; 2]
        } else {
            self.events[i - 1].covariates_after()
        }
    }

    /// Whether event `i` (0-based) sits at the origin and therefore only
    /// anchors the process.
    pub fn is_anchor(&self, i: usize) -> bool {
        i == 0 && self.events.first().is_some_and(|e| e.time == 0.0)
    }
}

/// Age vectors around one event: `pre` is the left limit a⁻ (no reset),
/// `post` has the fired component reset to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeState {
    pub pre: [f64; 2],
    pub post: [f64; 2],
}

/// Age states for the origin followed by one state per event.
pub fn age_trajectory(history: &EventHistory) -> Vec<AgeState> {
    let mut out = Vec::with_capacity(history.len() + 1);
    let mut state = AgeState {
        pre: [0.0; 2],
        post: [0.0; 2],
    };
    out.push(state);
    let mut last_time = 0.0;
    for e in history.events() {
        let dt = e.time - last_time;
        let pre = [state.post[0] + dt, state.post[1] + dt];
        let mut post = pre;
        post[e.event_type.index()] = 0.0;
        state = AgeState { pre, post };
        out.push(state);
        last_time = e.time;
    }
    out
}

/// Gap times W_{lj} of one type: successive differences of its event times,
/// the first measured from the origin. An event at the origin itself yields
/// no gap.
pub fn extract_gaps(history: &EventHistory, ty: EventType) -> Vec<f64> {
    let mut prev = 0.0;
    let mut gaps = Vec::new();
    for e in history.events().iter().filter(|e| e.event_type == ty) {
        let g = e.time - prev;
        if g > 0.0 {
            gaps.push(g);
        }
        prev = e.time;
    }
    gaps
}

/// A 2-vector of strictly positive gap times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapVector([f64; 2]);

impl GapVector {
    pub fn new(v1: f64, v2: f64) -> Result<Self> {
        if v1 > 0.0 && v2 > 0.0 && v1.is_finite() && v2.is_finite() {
            Ok(Self([v1, v2]))
        } else {
            Err(CarpError::Domain(format!(
                "gap vector ({v1}, {v2}) must be positive and finite"
            )))
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        self.0
    }

    pub fn get(&self, ty: EventType) -> f64 {
        self.0[ty.index()]
    }

    /// Element-wise `self >= ages`.
    pub fn dominates(&self, ages: [f64; 2]) -> bool {
        self.0[0] >= ages[0] && self.0[1] >= ages[1]
    }
}
