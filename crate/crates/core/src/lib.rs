//! Covariate-adjusted recurrent event processes for two-type systems.
//!
//! Each event resets the age of its type; the joint gap vector after every
//! event follows a lognormal law (bivariate lognormal, or lognormal marginals
//! joined by a Gumbel copula) whose locations shift linearly with the most
//! recent event durations, conditioned on exceeding the current ages.
//!
//! - [`event`]: histories, ages, gaps.
//! - [`dist`]: scalar and bivariate distribution kernels.
//! - [`model`]: survival, partials, densities and intensities of both variants.
//! - [`likelihood`], [`fit`]: exact log-likelihood, ML fitting, inference.
//! - [`simulate`], [`study`]: process simulation and simulation studies.
//! - [`io`]: CSV ingestion, configuration, reports and diagnostics.

pub mod dist;
pub mod error;
pub mod event;
pub mod fit;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod optim;
pub mod params;
pub mod simulate;
pub mod study;

pub use error::{CarpError, Result};
pub use event::{
    age_trajectory, extract_gaps, validate_history, AgeState, EventHistory, EventRecord,
    EventType, GapVector, RawEvent,
};
pub use fit::{aic, fit, numerical_hessian, tau_with_ci, FitConfig, FitResult};
pub use likelihood::log_likelihood;
pub use model::{
    conditional_gap_density, cumulative_intensity, joint_sf, location_adjust, sub_intensity,
    survival_partial, ModelSpec, Variant,
};
pub use simulate::{sample_conditional_gap, simulate_history, CovariateLaw, SimConfig};
pub use study::{run_study, FittedSpec, Scenario, StudyConfig, StudyResult};
