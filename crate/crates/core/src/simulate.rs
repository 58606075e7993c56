//! Simulation of CARP histories.
//!
//! After every event the whole gap vector is redrawn from the model law
//! conditioned on exceeding the current ages; the type whose residual gap runs
//! out first fires next.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist::gumbel;
use crate::dist::LognormalMarginal;
use crate::error::{invalid, CarpError, Result};
use crate::event::{EventHistory, EventType, GapVector, RawEvent};
use crate::model::{GapLaw, ModelSpec};

/// Conditioning events with survival below this are refused.
pub const DEEP_TAIL: f64 = 1e-12;

/// Rejection attempts allowed when both ages are positive.
pub const RETRY_BUDGET: usize = 100_000;

/// Law of the event durations that feed the covariate snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase", deny_unknown_fields)]
pub enum CovariateLaw {
    /// Every duration is zero, so covariates never move the locations.
    None,
    /// Independent lognormal durations, parameters per type.
    Lognormal { mu_x: [f64; 2], sigma_x: [f64; 2] },
}

impl Default for CovariateLaw {
    fn default() -> Self {
        CovariateLaw::Lognormal {
            mu_x: [0.0; 2],
            sigma_x: [0.5; 2],
        }
    }
}

impl CovariateLaw {
    pub fn validate(&self) -> Result<()> {
        if let CovariateLaw::Lognormal { mu_x, sigma_x } = self {
            for j in 0..2 {
                LognormalMarginal::new(mu_x[j], sigma_x[j])?;
            }
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, ty: EventType, rng: &mut R) -> f64 {
        match self {
            CovariateLaw::None => 0.0,
            CovariateLaw::Lognormal { mu_x, sigma_x } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu_x[ty.index()] + sigma_x[ty.index()] * z).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub n_events: usize,
    #[serde(default)]
    pub covariate_law: CovariateLaw,
    pub seed: u64,
}

/// ChaCha8 generator for `seed`, advanced to an independent `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulate `config.n_events` events starting from installation at t = 0.
pub fn simulate_history(config: &SimConfig) -> Result<EventHistory> {
    simulate_with_rng(config, &mut stream_rng(config.seed, 0))
}

/// As [`simulate_history`], drawing from a caller-supplied generator
/// (`config.seed` is ignored).
pub fn simulate_with_rng<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<EventHistory> {
    if config.n_events == 0 {
        return Err(invalid("n_events", "must be at least 1"));
    }
    config.covariate_law.validate()?;
    let mut raw = Vec::with_capacity(config.n_events);
    let mut ages = [0.0f64; 2];
    let mut snapshot = [0.0f64; 2];
    let mut t = 0.0f64;
    for _ in 0..config.n_events {
        let w = sample_conditional_gap(&config.model, ages, snapshot, rng)?.as_array();
        let resid = [w[0] - ages[0], w[1] - ages[1]];
        let ty = if resid[0] <= resid[1] {
            EventType::One
        } else {
            EventType::Two
        };
        let dt = resid[ty.index()];
        let next = t + dt;
        if !(next > t) {
            return Err(CarpError::SamplingFailed {
                attempts: 1,
                age: ages,
            });
        }
        t = next;
        ages = [ages[0] + dt, ages[1] + dt];
        ages[ty.index()] = 0.0;
        let duration = config.covariate_law.draw(ty, rng);
        raw.push(RawEvent {
            time: t,
            label: ty.label() as i64,
            duration,
            covariates: snapshot,
        });
        snapshot[ty.index()] = duration;
    }
    EventHistory::from_raw(&raw, t)
}

/// Draw W | W ≥ a under `model` with covariates `x`.
pub fn sample_conditional_gap<R: Rng + ?Sized>(
    model: &ModelSpec,
    a: [f64; 2],
    x: [f64; 2],
    rng: &mut R,
) -> Result<GapVector> {
    if !(a[0] >= 0.0 && a[1] >= 0.0) {
        return Err(invalid("age", format!("{a:?} must be non-negative")));
    }
    let law = model.at(x);
    let s = law.sf(a);
    if !(s >= DEEP_TAIL) {
        return Err(CarpError::DeepTail {
            survival: s,
            age: a,
        });
    }
    let w = match (a[0] > 0.0, a[1] > 0.0) {
        (false, false) => {
            let u: f64 = open_unit(rng);
            let w1 = law.marginal(EventType::One).quantile(u);
            draw_given(&law, EventType::One, w1, rng)
        }
        (true, false) => draw_aged(&law, EventType::One, a[0], rng),
        (false, true) => draw_aged(&law, EventType::Two, a[1], rng),
        (true, true) => {
            // Truncate the more restrictive component exactly, then accept
            // on the other; acceptance probability S(a)/S_j(a_j).
            let s1 = law.marginal(EventType::One).sf(a[0]);
            let s2 = law.marginal(EventType::Two).sf(a[1]);
            let ty = if s1 <= s2 {
                EventType::One
            } else {
                EventType::Two
            };
            let o = ty.other().index();
            let mut hit = None;
            for _ in 0..RETRY_BUDGET {
                let w = draw_aged(&law, ty, a[ty.index()], rng);
                if w[o] >= a[o] {
                    hit = Some(w);
                    break;
                }
            }
            hit.ok_or(CarpError::SamplingFailed {
                attempts: RETRY_BUDGET,
                age: a,
            })?
        }
    };
    GapVector::new(w[0], w[1])
}

/// Uniform on (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Aged component from its marginal truncated to [age, ∞), then the other
/// from its conditional law.
fn draw_aged<R: Rng + ?Sized>(law: &GapLaw, ty: EventType, age: f64, rng: &mut R) -> [f64; 2] {
    let m = law.marginal(ty);
    let q = open_unit(rng) * m.sf(age);
    let wj = m.upper_quantile(q).max(age);
    draw_given(law, ty, wj, rng)
}

/// Complete a gap vector given W_ty = wj.
fn draw_given<R: Rng + ?Sized>(law: &GapLaw, ty: EventType, wj: f64, rng: &mut R) -> [f64; 2] {
    let j = ty.index();
    let o = 1 - j;
    let wo = match law {
        GapLaw::Mln { marginals, chol, .. } => {
            let (slope, var) = chol.conditional(j);
            let mean = marginals[o].mu + slope * (wj.ln() - marginals[j].mu);
            let sd = var.sqrt();
            let z: f64 = StandardNormal.sample(rng);
            (mean + sd * z).exp()
        }
        GapLaw::Copula { marginals, alpha } => {
            let uj = marginals[j].cdf(wj);
            let p = open_unit(rng);
            // Gumbel is exchangeable, so ∂C/∂u_j has the same form for
            // either j.
            let uo = gumbel::conditional_quantile(uj, p, *alpha);
            marginals[o].quantile(uo)
        }
    };
    let mut w = [0.0; 2];
    w[j] = wj;
    w[o] = wo;
    w
}
