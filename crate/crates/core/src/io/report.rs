//! Versioned JSON report of a fit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fit::{Convergence, FitFlags, FitResult};
use crate::model::{ModelSpec, Variant};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub variant: Variant,
    pub estimates: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub ci95: BTreeMap<String, [f64; 2]>,
    pub loglik: f64,
    pub aic: f64,
    pub n_params: usize,
    pub n_events: usize,
    pub tau: f64,
    pub tau_se: f64,
    pub tau_ci95: [f64; 2],
    pub flags: FitFlags,
    pub convergence: Convergence,
    pub seed: u64,
    pub config_hash: String,
    /// Fitted model, re-usable as input to diagnostics.
    pub model: ModelSpec,
}

impl FitReport {
    pub fn new(fit: &FitResult, n_events: usize, seed: u64, config_hash: String) -> Self {
        let names = fit.param_names();
        let by_name = |v: &[f64]| -> BTreeMap<String, f64> {
            names.iter().map(|n| n.to_string()).zip(v.iter().copied()).collect()
        };
        Self {
            schema_version: SCHEMA_VERSION,
            variant: fit.variant,
            estimates: by_name(&fit.estimates),
            std_errors: by_name(&fit.std_errors),
            ci95: names
                .iter()
                .map(|n| n.to_string())
                .zip(fit.ci95.iter().copied())
                .collect(),
            loglik: fit.loglik,
            aic: fit.aic,
            n_params: fit.n_params,
            n_events,
            tau: fit.tau.tau,
            tau_se: fit.tau.se,
            tau_ci95: fit.tau.ci95,
            flags: fit.flags,
            convergence: fit.convergence.clone(),
            seed,
            config_hash,
            model: fit.model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
