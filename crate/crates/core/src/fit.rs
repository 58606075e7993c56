//! Maximum-likelihood fitting and asymptotic inference.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::tau::{tau_gumbel_derivative, tau_mln_gradient};
use crate::error::{CarpError, Result};
use crate::event::{extract_gaps, EventHistory, EventType};
use crate::likelihood::LikelihoodData;
use crate::model::{ModelSpec, Variant};
use crate::optim::{bfgs, fd_gradient, fd_hessian, nelder_mead, BfgsOptions, NelderMeadOptions};
use crate::params::{UnconstrainedParams, ALPHA_EPS, B_RANGE, DEP, N_PARAMS};

/// 97.5% standard normal quantile.
pub const Z975: f64 = 1.959_963_984_540_054;

/// α − 1 below this is reported as an independence-boundary fit.
pub const BOUNDARY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Number of optimizer starts; the first is the moment-based center.
    pub starts: usize,
    /// Seed for start jitter.
    pub seed: u64,
    /// Standard deviation of start jitter in unconstrained coordinates.
    pub jitter: f64,
    /// Fix B = 0 and fit only the five distribution parameters.
    pub zero_b: bool,
    pub nelder_mead_evals: usize,
    pub bfgs_iters: usize,
    pub grad_tol: f64,
    /// Relative step of the central-difference Hessian.
    pub hessian_step: f64,
    /// Skip the Hessian (point estimates only).
    pub skip_inference: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            jitter: 0.25,
            zero_b: false,
            nelder_mead_evals: 1500,
            bfgs_iters: 300,
            grad_tol: 1e-5,
            hessian_step: 1e-4,
            skip_inference: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartDiagnostics {
    pub loglik: f64,
    pub converged: bool,
    pub grad_max: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub best_start: usize,
    pub starts: Vec<StartDiagnostics>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitFlags {
    /// The Hessian was not positive definite; a pseudo-inverse was used.
    pub hessian_pseudo_inverse: bool,
    /// The copula fit sits on the independence boundary α = 1.
    pub boundary: bool,
    /// The tau interval collapsed to the point estimate.
    pub tau_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauInterval {
    pub tau: f64,
    pub se: f64,
    pub ci95: [f64; 2],
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub variant: Variant,
    pub model: ModelSpec,
    /// Natural parameters in [`Variant::param_names`] order.
    pub estimates: [f64; N_PARAMS],
    pub loglik: f64,
    /// Number of free parameters (9, or 5 with B fixed at zero).
    pub n_params: usize,
    pub aic: f64,
    pub zero_b: bool,
    /// Events contributing to the likelihood.
    pub n_terms: usize,
    /// Asymptotic covariance of the natural parameters (row-major 9×9).
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: [f64; N_PARAMS],
    pub ci95: [[f64; 2]; N_PARAMS],
    pub tau: TauInterval,
    pub flags: FitFlags,
    pub convergence: Convergence,
}

impl FitResult {
    pub fn param_names(&self) -> [&'static str; N_PARAMS] {
        self.variant.param_names()
    }
}

/// AIC = 2k − 2·loglik.
pub fn aic(loglik: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

fn free_indices(zero_b: bool) -> Vec<usize> {
    if zero_b {
        (0..B_RANGE.start).collect()
    } else {
        (0..N_PARAMS).collect()
    }
}

/// Objective over the free coordinates: negative log-likelihood, +∞ outside
/// the valid region.
struct Objective<'a> {
    data: &'a LikelihoodData,
    variant: Variant,
    base: UnconstrainedParams,
    free: Vec<usize>,
}

impl Objective<'_> {
    fn full(&self, z: &[f64]) -> UnconstrainedParams {
        let mut u = self.base;
        for (&k, &v) in self.free.iter().zip(z) {
            u.0[k] = v;
        }
        u
    }

    fn eval(&self, z: &[f64]) -> f64 {
        match self.full(z).to_model(self.variant) {
            Ok(m) => {
                let ll = self.data.log_likelihood(&m);
                if ll.is_finite() {
                    -ll
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    }
}

/// Moment-based starting model: per-type log-gap mean and SD, B = 0,
/// dependence near independence.
pub fn moment_start(variant: Variant, history: &EventHistory) -> ModelSpec {
    let moments = |ty| {
        let logs: Vec<f64> = extract_gaps(history, ty).iter().map(|g| g.ln()).collect();
        if logs.len() < 2 {
            let scale = (history.termination().max(1.0)).ln();
            return (scale, 1.0);
        }
        let n = logs.len() as f64;
        let mean = logs.iter().sum::<f64>() / n;
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt().clamp(0.05, 5.0))
    };
    let (m1, s1) = moments(EventType::One);
    let (m2, s2) = moments(EventType::Two);
    let zero = [[0.0; 2]; 2];
    match variant {
        Variant::Mln => ModelSpec::mln([m1, m2], s1, 0.0, s2, zero),
        Variant::Copula => ModelSpec::copula([m1, m2], [s1, s2], 1.05, zero),
    }
    .expect("moment start is valid")
}

/// Fit `variant` to `history` by multi-start maximum likelihood.
pub fn fit(variant: Variant, history: &EventHistory, config: &FitConfig) -> Result<FitResult> {
    let data = LikelihoodData::new(history);
    if data.len() < 20 {
        log::warn!(
            "fitting {} with only {} likelihood terms; estimates may be unstable",
            variant,
            data.len()
        );
    }
    let center = moment_start(variant, history);
    fit_from(variant, &data, &center, config)
}

/// Fit starting from a given model (the center of the multi-start cloud).
pub fn fit_from(
    variant: Variant,
    data: &LikelihoodData,
    center: &ModelSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    if data.is_empty() {
        return Err(CarpError::FitFailed(vec![
            "history has no likelihood terms".into()
        ]));
    }
    let mut base = UnconstrainedParams::from_model(center);
    if config.zero_b {
        for k in B_RANGE {
            base.0[k] = 0.0;
        }
    }
    let free = free_indices(config.zero_b);
    let obj = Objective {
        data,
        variant,
        base,
        free: free.clone(),
    };
    let z0: Vec<f64> = free.iter().map(|&k| base.0[k]).collect();

    let starts: Vec<Vec<f64>> = (0..config.starts.max(1))
        .map(|s| {
            if s == 0 {
                z0.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(s as u64);
                z0.iter()
                    .map(|v| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        v + config.jitter * e
                    })
                    .collect()
            }
        })
        .collect();

    let nm_opts = NelderMeadOptions {
        max_evals: config.nelder_mead_evals,
        initial_step: 0.1,
        f_tol: 1e-9,
        x_tol: 1e-5,
    };
    let bfgs_opts = BfgsOptions {
        max_iter: config.bfgs_iters,
        grad_tol: config.grad_tol,
        fd_step: 1e-5,
    };
    let f = |z: &[f64]| obj.eval(z);
    let tol = config.grad_tol.max(1e-4);
    let candidates: Vec<Candidate> = starts
        .par_iter()
        .map(|z| {
            let nm = nelder_mead(f, z, &nm_opts);
            let out = bfgs(f, &nm.x, &bfgs_opts);
            let mut c = Candidate {
                u: obj.full(&out.x),
                f: out.f,
                grad_max: out.grad_max,
                evals: nm.evals + out.evals,
                converged: out.f.is_finite() && out.grad_max < tol,
            };
            if !c.converged && variant == Variant::Copula && c.u.0[DEP] < BOUNDARY_POLISH_U {
                polish_at_boundary(data, &free, &bfgs_opts, tol, &mut c);
            }
            c
        })
        .collect();

    let diagnostics: Vec<StartDiagnostics> = candidates
        .iter()
        .map(|c| StartDiagnostics {
            loglik: -c.f,
            converged: c.converged,
            grad_max: c.grad_max,
            evals: c.evals,
        })
        .collect();
    let best = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.converged)
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f))
        .map(|(i, _)| i);
    let Some(best) = best else {
        return Err(CarpError::FitFailed(
            diagnostics
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    format!(
                        "start {i}: loglik {:.4}, max |grad| {:.2e}, {} evals",
                        d.loglik, d.grad_max, d.evals
                    )
                })
                .collect(),
        ));
    };
    let u_hat = candidates[best].u;
    let model = u_hat.to_model(variant)?;
    let loglik = data.log_likelihood(&model);
    let convergence = Convergence {
        converged: true,
        best_start: best,
        starts: diagnostics,
    };
    Ok(assemble(
        variant, data, model, u_hat, loglik, &free, config, convergence,
    ))
}

/// ln(α − 1) below which a non-converged copula start is retried on the
/// independence boundary.
const BOUNDARY_POLISH_U: f64 = -4.6; // α − 1 ≈ 0.01

struct Candidate {
    u: UnconstrainedParams,
    f: f64,
    grad_max: f64,
    evals: usize,
    converged: bool,
}

/// Re-optimize with α pinned at the independence boundary. The boundary
/// point is accepted when the remaining gradient vanishes, the fit is no
/// worse, and the likelihood does not increase into the interior (the
/// one-sided condition of a constrained maximum).
fn polish_at_boundary(
    data: &LikelihoodData,
    free: &[usize],
    opts: &BfgsOptions,
    tol: f64,
    c: &mut Candidate,
) {
    let mut base = c.u;
    base.0[DEP] = ALPHA_EPS.ln();
    let inner: Vec<usize> = free.iter().copied().filter(|&k| k != DEP).collect();
    let obj = Objective {
        data,
        variant: Variant::Copula,
        base,
        free: inner.clone(),
    };
    let z0: Vec<f64> = inner.iter().map(|&k| base.0[k]).collect();
    let out = bfgs(|z: &[f64]| obj.eval(z), &z0, opts);
    c.evals += out.evals;
    if !(out.f.is_finite() && out.grad_max < tol && out.f <= c.f + 1e-6) {
        return;
    }
    let u = obj.full(&out.x);
    let h = 1e-4;
    let mut th = u.natural(Variant::Copula);
    th[DEP] = 1.0 + h;
    let inside = ModelSpec::from_natural(Variant::Copula, &th)
        .map(|m| -data.log_likelihood(&m))
        .unwrap_or(f64::INFINITY);
    if (out.f - inside) / h <= 1e-3 {
        c.u = u;
        c.f = out.f;
        c.grad_max = out.grad_max;
        c.converged = true;
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    variant: Variant,
    data: &LikelihoodData,
    model: ModelSpec,
    u_hat: UnconstrainedParams,
    loglik: f64,
    free: &[usize],
    config: &FitConfig,
    convergence: Convergence,
) -> FitResult {
    let estimates = model.to_natural();
    let boundary = variant == Variant::Copula && estimates[DEP] - 1.0 < BOUNDARY_TOL;
    let mut flags = FitFlags {
        boundary,
        ..FitFlags::default()
    };
    let covariance = if config.skip_inference {
        DMatrix::from_element(N_PARAMS, N_PARAMS, f64::NAN)
    } else {
        let (cov, pseudo) =
            natural_covariance(data, variant, &u_hat, free, boundary, config.hessian_step);
        flags.hessian_pseudo_inverse = pseudo;
        cov
    };
    let std_errors: [f64; N_PARAMS] =
        std::array::from_fn(|k| covariance[(k, k)].max(0.0).sqrt());
    let ci95 = std::array::from_fn(|k| {
        let half = Z975 * std_errors[k];
        [estimates[k] - half, estimates[k] + half]
    });
    let covariance_rows: Vec<Vec<f64>> = (0..N_PARAMS)
        .map(|i| (0..N_PARAMS).map(|j| covariance[(i, j)]).collect())
        .collect();
    let mut result = FitResult {
        variant,
        model,
        estimates,
        loglik,
        n_params: free.len(),
        aic: aic(loglik, free.len()),
        zero_b: config.zero_b,
        n_terms: data.len(),
        covariance: covariance_rows,
        std_errors,
        ci95,
        tau: TauInterval {
            tau: model.kendall_tau(),
            se: f64::NAN,
            ci95: [f64::NAN; 2],
            degenerate: true,
        },
        flags,
        convergence,
    };
    result.tau = tau_with_ci(&result);
    result.flags.tau_degenerate = result.tau.degenerate;
    result
}

/// Central-difference Hessian of the negative log-likelihood in unconstrained
/// coordinates at `model` (9×9, B coordinates included).
pub fn numerical_hessian(model: &ModelSpec, history: &EventHistory, step: f64) -> DMatrix<f64> {
    let data = LikelihoodData::new(history);
    hessian_on(
        &data,
        model.variant(),
        &UnconstrainedParams::from_model(model),
        &(0..N_PARAMS).collect::<Vec<_>>(),
        step,
    )
}

fn hessian_on(
    data: &LikelihoodData,
    variant: Variant,
    u: &UnconstrainedParams,
    free: &[usize],
    step: f64,
) -> DMatrix<f64> {
    let obj = Objective {
        data,
        variant,
        base: *u,
        free: free.to_vec(),
    };
    let z: Vec<f64> = free.iter().map(|&k| u.0[k]).collect();
    fd_hessian(&|x: &[f64]| obj.eval(x), &z, step)
}

/// Inverse of a symmetric matrix, falling back to the eigenvalue
/// pseudo-inverse (discarding non-positive directions) when it is not
/// positive definite. Returns the inverse and whether the fallback was used.
pub fn invert_information(h: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    if let Some(ch) = h.clone().cholesky() {
        return (ch.inverse(), false);
    }
    log::warn!("Hessian not positive definite; using pseudo-inverse");
    let eig = SymmetricEigen::new(h.clone());
    let max = eig.eigenvalues.amax();
    let n = h.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 1e-10 * max {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / lam;
        }
    }
    (inv, true)
}

fn natural_covariance(
    data: &LikelihoodData,
    variant: Variant,
    u_hat: &UnconstrainedParams,
    free: &[usize],
    boundary: bool,
    step: f64,
) -> (DMatrix<f64>, bool) {
    let jac = u_hat.jacobian_diag(variant);
    // On the copula boundary the ln(α − 1) coordinate is flat; treat α as
    // fixed for the other parameters and take its variance from one-sided
    // curvature in α itself.
    let inner: Vec<usize> = if boundary {
        free.iter().copied().filter(|&k| k != DEP).collect()
    } else {
        free.to_vec()
    };
    let h = hessian_on(data, variant, u_hat, &inner, step);
    let (inv, pseudo) = invert_information(&h);
    let mut cov = DMatrix::zeros(N_PARAMS, N_PARAMS);
    for (a, &i) in inner.iter().enumerate() {
        for (b, &j) in inner.iter().enumerate() {
            let sym = 0.5 * (inv[(a, b)] + inv[(b, a)]);
            cov[(i, j)] = (jac[i] * jac[j]) * sym;
        }
    }
    if boundary {
        let m = u_hat.to_model(variant).expect("fitted model is valid");
        let th = m.to_natural();
        let nll = |alpha: f64| {
            let mut t = th;
            t[DEP] = alpha;
            ModelSpec::from_natural(variant, &t)
                .map(|m| -data.log_likelihood(&m))
                .unwrap_or(f64::INFINITY)
        };
        let h = step.max(1e-4);
        let a0 = th[DEP];
        let curv = (nll(a0 + 2.0 * h) - 2.0 * nll(a0 + h) + nll(a0)) / (h * h);
        cov[(DEP, DEP)] = if curv > 0.0 { 1.0 / curv } else { f64::NAN };
    }
    (cov, pseudo)
}

/// Kendall's tau with a Delta-method 95% interval.
pub fn tau_with_ci(fit: &FitResult) -> TauInterval {
    let th = &fit.estimates;
    let cov = |i: usize, j: usize| fit.covariance[i][j];
    let tau = fit.model.kendall_tau();
    let var = match fit.variant {
        Variant::Mln => {
            // Gradient with respect to (η, σ2) = natural indices (4, 3).
            let [g_eta, g_s2] = tau_mln_gradient(th[DEP], th[3]);
            g_eta * g_eta * cov(DEP, DEP)
                + g_s2 * g_s2 * cov(3, 3)
                + 2.0 * g_eta * g_s2 * cov(DEP, 3)
        }
        Variant::Copula => {
            let g = tau_gumbel_derivative(th[DEP]);
            g * g * cov(DEP, DEP)
        }
    };
    let degenerate = !(var.is_finite() && var > 0.0) || fit.flags.boundary;
    if !(var.is_finite() && var > 0.0) {
        return TauInterval {
            tau,
            se: 0.0,
            ci95: [tau, tau],
            degenerate: true,
        };
    }
    let se = var.sqrt();
    TauInterval {
        tau,
        se,
        ci95: [tau - Z975 * se, tau + Z975 * se],
        degenerate,
    }
}

/// Max-norm of the finite-difference gradient of the log-likelihood in
/// unconstrained coordinates.
pub fn score_max_norm(model: &ModelSpec, history: &EventHistory, zero_b: bool) -> f64 {
    let data = LikelihoodData::new(history);
    let free = free_indices(zero_b);
    let u = UnconstrainedParams::from_model(model);
    let obj = Objective {
        data: &data,
        variant: model.variant(),
        base: u,
        free: free.clone(),
    };
    let z: Vec<f64> = free.iter().map(|&k| u.0[k]).collect();
    fd_gradient(&|x: &[f64]| obj.eval(x), &z, 1e-5)
        .into_iter()
        .fold(0.0, |m, g| m.max(g.abs()))
}
