//! Exact log-likelihood of an event history.
//!
//! Event i contributes D_{δi}(a_i⁻) / S(a_{i−1}), both evaluated under the
//! covariate snapshot in force over (t_{i−1}, t_i]. An event at the origin only
//! anchors the process and contributes nothing.

use crate::event::{age_trajectory, EventHistory, EventType};
use crate::model::ModelSpec;

/// Terms below this log value are treated as underflow.
pub const LOG_UNDERFLOW: f64 = -690.775_527_898_213_7; // ln(1e-300)

/// Per-event quantities the likelihood needs, independent of parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermInput {
    /// 1-based event index.
    pub index: usize,
    pub event_type: EventType,
    pub pre_age: [f64; 2],
    pub prev_post_age: [f64; 2],
    pub covariates: [f64; 2],
}

/// Parameter-free precomputation of a history for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodData {
    terms: Vec<TermInput>,
}

impl LikelihoodData {
    pub fn new(history: &EventHistory) -> Self {
        let ages = age_trajectory(history);
        let terms = history
            .events()
            .iter()
            .enumerate()
            .filter(|(i, _)| !history.is_anchor(*i))
            .map(|(i, e)| TermInput {
                index: i + 1,
                event_type: e.event_type,
                pre_age: ages[i + 1].pre,
                prev_post_age: ages[i].post,
                covariates: history.snapshot_after(i),
            })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[TermInput] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Log-likelihood, or −∞ when any factor underflows.
    pub fn log_likelihood(&self, model: &ModelSpec) -> f64 {
        let mut sum = NeumaierSum::default();
        for t in &self.terms {
            let (ln_d, ln_s) = term(model, t);
            if !(ln_d > LOG_UNDERFLOW && ln_s > LOG_UNDERFLOW) {
                return f64::NEG_INFINITY;
            }
            sum.add(ln_d - ln_s);
        }
        sum.total()
    }
}

/// (ln D_{δi}(a_i⁻), ln S(a_{i−1})) for one event.
pub fn term(model: &ModelSpec, t: &TermInput) -> (f64, f64) {
    let law = model.at(t.covariates);
    (
        law.ln_partial(t.event_type, t.pre_age),
        law.ln_sf(t.prev_post_age),
    )
}

/// Σᵢ [ln D_{δi}(a_i⁻) − ln S(a_{i−1})]; 0 for an empty history.
pub fn log_likelihood(model: &ModelSpec, history: &EventHistory) -> f64 {
    LikelihoodData::new(history).log_likelihood(model)
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
