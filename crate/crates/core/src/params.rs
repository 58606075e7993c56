//! Unconstrained parameterization used by the optimizer.
//!
//! Coordinates: (μ1, μ2, ln σ1, ln σ2, d, b11, b12, b21, b22) where d = η for
//! the lognormal model and d = ln(α − 1) for the copula model, with α − 1
//! floored at [`ALPHA_EPS`] on the way in so the independence boundary maps to
//! a finite point.

use crate::error::Result;
use crate::model::{ModelSpec, Variant};

pub const N_PARAMS: usize = 9;

/// Floor on α − 1 when mapping into unconstrained space.
pub const ALPHA_EPS: f64 = 1e-8;

/// Index of the dependence parameter in natural and unconstrained vectors.
pub const DEP: usize = 4;

/// Indices of the B entries.
pub const B_RANGE: std::ops::Range<usize> = 5..9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconstrainedParams(pub [f64; N_PARAMS]);

impl UnconstrainedParams {
    pub fn from_model(model: &ModelSpec) -> Self {
        let th = model.to_natural();
        let mut u = th;
        u[2] = th[2].ln();
        u[3] = th[3].ln();
        if model.variant() == Variant::Copula {
            u[DEP] = (th[DEP] - 1.0).max(ALPHA_EPS).ln();
        }
        Self(u)
    }

    pub fn natural(&self, variant: Variant) -> [f64; N_PARAMS] {
        let u = &self.0;
        let mut th = *u;
        th[2] = u[2].exp();
        th[3] = u[3].exp();
        if variant == Variant::Copula {
            // ln(α − 1) above ~13.8 would exceed the clamp anyway.
            th[DEP] = 1.0 + u[DEP].min(13.8).exp();
        }
        th
    }

    pub fn to_model(&self, variant: Variant) -> Result<ModelSpec> {
        ModelSpec::from_natural(variant, &self.natural(variant))
    }

    /// Diagonal of ∂θ/∂u (the transform acts coordinate-wise).
    pub fn jacobian_diag(&self, variant: Variant) -> [f64; N_PARAMS] {
        let th = self.natural(variant);
        let mut j = [1.0; N_PARAMS];
        j[2] = th[2];
        j[3] = th[3];
        if variant == Variant::Copula {
            j[DEP] = th[DEP] - 1.0;
        }
        j
    }
}
