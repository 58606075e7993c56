//! Run configuration (TOML). Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CarpError, Result};
use crate::fit::FitConfig;
use crate::io::ingest::{TypeMapping, Window};
use crate::model::{Matrix2, ModelSpec, Variant};
use crate::simulate::CovariateLaw;
use crate::study::{
    b_grid, reference_truths, sample_size_grid, scale_grid, tau_grid, FittedSpec, Scenario,
    StudyConfig, REFERENCE_B,
};

/// A model given by its natural parameters. For the lognormal variant
/// `sigma[1]` is the Cholesky factor σ2 and `dependence` is η; for the copula
/// `sigma` are the marginal scales and `dependence` is α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSpec {
    pub variant: Variant,
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub dependence: f64,
    #[serde(default)]
    pub b: Matrix2,
}

impl Default for TruthSpec {
    fn default() -> Self {
        Self {
            variant: Variant::Copula,
            mu: [1.0, 1.5],
            sigma: [0.25, 0.25],
            dependence: 1.5,
            b: REFERENCE_B,
        }
    }
}

impl TruthSpec {
    pub fn to_model(&self) -> Result<ModelSpec> {
        let b = self.b;
        ModelSpec::from_natural(
            self.variant,
            &[
                self.mu[0],
                self.mu[1],
                self.sigma[0],
                self.sigma[1],
                self.dependence,
                b[0][0],
                b[0][1],
                b[1][0],
                b[1][1],
            ],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub truth: TruthSpec,
    pub n_events: usize,
    pub covariate_law: CovariateLaw,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            truth: TruthSpec::default(),
            n_events: 1000,
            covariate_law: CovariateLaw::default(),
        }
    }
}

/// Named scenario grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grid {
    /// n = 1000, τ ≈ 0.33, both truths.
    Reference,
    SampleSize,
    Tau,
    Scale,
    Covariate,
}

impl Grid {
    pub fn scenarios(self, law: CovariateLaw) -> Vec<Scenario> {
        match self {
            Grid::Reference => reference_truths(0.25, 1.5, 0.1445, REFERENCE_B)
                .into_iter()
                .map(|m| Scenario {
                    name: format!("{}-reference", m.variant()),
                    truth: m,
                    n_events: 1000,
                    covariate_law: law,
                })
                .collect(),
            Grid::SampleSize => sample_size_grid(law),
            Grid::Tau => tau_grid(law),
            Grid::Scale => scale_grid(law),
            Grid::Covariate => b_grid(law),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub grid: Grid,
    pub replicates: usize,
    pub fitted: Vec<FittedSpec>,
    pub covariate_law: CovariateLaw,
    /// Optimizer starts per replicate fit.
    pub starts: usize,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            grid: Grid::Reference,
            replicates: 100,
            fitted: FittedSpec::both(),
            covariate_law: CovariateLaw::default(),
            starts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
    pub mapping: TypeMapping,
    pub data: Window,
    pub fit: FitConfig,
    pub simulate: SimulateSection,
    pub study: StudySection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CarpError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CarpError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.mapping.validate()?;
        self.simulate.covariate_law.validate()?;
        self.study.covariate_law.validate()?;
        self.simulate.truth.to_model()?;
        if self.simulate.n_events == 0 {
            return Err(CarpError::Config("simulate.n_events must be positive".into()));
        }
        if self.study.replicates == 0 || self.study.fitted.is_empty() {
            return Err(CarpError::Config(
                "study needs at least one replicate and one fitted model".into(),
            ));
        }
        if self.fit.starts == 0 {
            return Err(CarpError::Config("fit.starts must be positive".into()));
        }
        Ok(())
    }

    pub fn study_config(&self, seed: u64) -> StudyConfig {
        StudyConfig {
            replicates: self.study.replicates,
            seed,
            fitted: self.study.fitted.clone(),
            fit: FitConfig {
                starts: self.study.starts,
                skip_inference: true,
                ..self.fit.clone()
            },
        }
    }

    /// SHA-256 of the canonical JSON rendering of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
