//! The two covariate-adjusted gap-time models and the quantities derived from
//! them: joint survival S, its negative partials D_j, the truncated gap
//! density, and (cumulative) sub-intensities.
//!
//! The location of each log gap is shifted linearly by the covariate snapshot,
//! μ(x) = μ₀ + Bx, in both variants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::gumbel::{self, GumbelParam};
use crate::dist::mln::{standardized_sf, CholeskyCovariance};
use crate::dist::normal::{log_std_normal_cdf, log_std_normal_pdf};
use crate::dist::LognormalMarginal;
use crate::error::{invalid, CarpError, Result};
use crate::event::{age_trajectory, EventHistory, EventType, GapVector};

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mln,
    Copula,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Mln => "mln",
            Variant::Copula => "copula",
        }
    }

    /// Name of the dependence parameter in the natural parameter vector.
    pub fn dependence_name(self) -> &'static str {
        match self {
            Variant::Mln => "eta",
            Variant::Copula => "alpha",
        }
    }

    pub fn param_names(self) -> [&'static str; 9] {
        [
            "mu1",
            "mu2",
            "sigma1",
            "sigma2",
            self.dependence_name(),
            "b11",
            "b12",
            "b21",
            "b22",
        ]
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = CarpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mln" => Ok(Variant::Mln),
            "copula" | "gumbel" => Ok(Variant::Copula),
            other => Err(CarpError::Config(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlnParams {
    pub mu0: [f64; 2],
    pub chol: CholeskyCovariance,
    pub b: Matrix2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaParams {
    /// Baseline marginals (locations at x = 0).
    pub marginals: [LognormalMarginal; 2],
    pub alpha: GumbelParam,
    pub b: Matrix2,
}

/// A fully specified model of either variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum ModelSpec {
    Mln(MlnParams),
    Copula(CopulaParams),
}

fn check_b(b: &Matrix2) -> Result<()> {
    if b.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid("B", "entries must be finite"))
    }
}

impl ModelSpec {
    pub fn mln(mu0: [f64; 2], sigma1: f64, eta: f64, sigma2: f64, b: Matrix2) -> Result<Self> {
        if !mu0.iter().all(|m| m.is_finite()) {
            return Err(invalid("mu0", "must be finite"));
        }
        check_b(&b)?;
        Ok(ModelSpec::Mln(MlnParams {
            mu0,
            chol: CholeskyCovariance::new(sigma1, eta, sigma2)?,
            b,
        }))
    }

    pub fn copula(mu0: [f64; 2], sigma: [f64; 2], alpha: f64, b: Matrix2) -> Result<Self> {
        check_b(&b)?;
        Ok(ModelSpec::Copula(CopulaParams {
            marginals: [
                LognormalMarginal::new(mu0[0], sigma[0])?,
                LognormalMarginal::new(mu0[1], sigma[1])?,
            ],
            alpha: GumbelParam::new(alpha)?,
            b,
        }))
    }

    pub fn variant(&self) -> Variant {
        match self {
            ModelSpec::Mln(_) => Variant::Mln,
            ModelSpec::Copula(_) => Variant::Copula,
        }
    }

    pub fn b(&self) -> &Matrix2 {
        match self {
            ModelSpec::Mln(p) => &p.b,
            ModelSpec::Copula(p) => &p.b,
        }
    }

    pub fn baseline_locations(&self) -> [f64; 2] {
        match self {
            ModelSpec::Mln(p) => p.mu0,
            ModelSpec::Copula(p) => [p.marginals[0].mu, p.marginals[1].mu],
        }
    }

    /// μ(x) = μ₀ + Bx.
    pub fn location_adjust(&self, x: [f64; 2]) -> [f64; 2] {
        let mu0 = self.baseline_locations();
        let b = self.b();
        [
            mu0[0] + b[0][0] * x[0] + b[0][1] * x[1],
            mu0[1] + b[1][0] * x[0] + b[1][1] * x[1],
        ]
    }

    /// Natural parameters (μ1, μ2, σ1, σ2, η|α, b11, b12, b21, b22).
    pub fn to_natural(&self) -> [f64; 9] {
        let b = self.b();
        let (mu, s, dep) = match self {
            ModelSpec::Mln(p) => (p.mu0, [p.chol.sigma1, p.chol.sigma2], p.chol.eta),
            ModelSpec::Copula(p) => (
                [p.marginals[0].mu, p.marginals[1].mu],
                [p.marginals[0].sigma, p.marginals[1].sigma],
                p.alpha.value(),
            ),
        };
        [
            mu[0], mu[1], s[0], s[1], dep, b[0][0], b[0][1], b[1][0], b[1][1],
        ]
    }

    pub fn from_natural(variant: Variant, th: &[f64; 9]) -> Result<Self> {
        let b = [[th[5], th[6]], [th[7], th[8]]];
        match variant {
            Variant::Mln => Self::mln([th[0], th[1]], th[2], th[4], th[3], b),
            Variant::Copula => Self::copula([th[0], th[1]], [th[2], th[3]], th[4], b),
        }
    }

    /// Kendall's tau implied by the dependence parameter.
    pub fn kendall_tau(&self) -> f64 {
        match self {
            ModelSpec::Mln(p) => crate::dist::kendall_tau_mln(&p.chol),
            ModelSpec::Copula(p) => 1.0 - 1.0 / p.alpha.value(),
        }
    }

    /// Resolve the gap law in force under covariate snapshot `x`.
    pub fn at(&self, x: [f64; 2]) -> GapLaw {
        let mu = self.location_adjust(x);
        match self {
            ModelSpec::Mln(p) => {
                let sds = p.chol.marginal_sds();
                GapLaw::Mln {
                    marginals: [
                        LognormalMarginal {
                            mu: mu[0],
                            sigma: sds[0],
                        },
                        LognormalMarginal {
                            mu: mu[1],
                            sigma: sds[1],
                        },
                    ],
                    chol: p.chol,
                    rho: p.chol.rho(),
                }
            }
            ModelSpec::Copula(p) => GapLaw::Copula {
                marginals: [
                    LognormalMarginal {
                        mu: mu[0],
                        sigma: p.marginals[0].sigma,
                    },
                    LognormalMarginal {
                        mu: mu[1],
                        sigma: p.marginals[1].sigma,
                    },
                ],
                alpha: p.alpha.value(),
            },
        }
    }
}

/// The joint gap law for one covariate snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapLaw {
    Mln {
        marginals: [LognormalMarginal; 2],
        chol: CholeskyCovariance,
        rho: f64,
    },
    Copula {
        marginals: [LognormalMarginal; 2],
        alpha: f64,
    },
}

impl GapLaw {
    pub fn marginal(&self, ty: EventType) -> &LognormalMarginal {
        match self {
            GapLaw::Mln { marginals, .. } | GapLaw::Copula { marginals, .. } => {
                &marginals[ty.index()]
            }
        }
    }

    fn marginals(&self) -> &[LognormalMarginal; 2] {
        match self {
            GapLaw::Mln { marginals, .. } | GapLaw::Copula { marginals, .. } => marginals,
        }
    }

    /// S(v) for v ≥ 0; a zero component leaves the other marginal survival.
    pub fn sf(&self, v: [f64; 2]) -> f64 {
        let m = self.marginals();
        match (v[0] > 0.0, v[1] > 0.0) {
            (false, false) => 1.0,
            (true, false) => m[0].sf(v[0]),
            (false, true) => m[1].sf(v[1]),
            (true, true) => match self {
                GapLaw::Mln { rho, .. } => standardized_sf(m[0].z(v[0]), m[1].z(v[1]), *rho),
                GapLaw::Copula { alpha, .. } => {
                    // S = S_k − (F_o − C) with k the smaller marginal survival.
                    // In x_j = −ln F_j, F_o − C = e^{−x_o}(1 − e^{−(s − x_o)})
                    // with s = (x_1^α + x_2^α)^{1/α}; the excess s − x_o is
                    // formed without cancellation, so S keeps relative
                    // precision deep in the upper tail.
                    let sf = [m[0].sf(v[0]), m[1].sf(v[1])];
                    let k = if sf[0] <= sf[1] { 0 } else { 1 };
                    let o = 1 - k;
                    let xk = -log_std_normal_cdf(m[k].z(v[k]));
                    let xo = -log_std_normal_cdf(m[o].z(v[o]));
                    if !(xo > 0.0) {
                        return 0.0;
                    }
                    let r = (xk / xo).powf(*alpha);
                    let excess = xo * (r.ln_1p() / alpha).exp_m1();
                    (sf[k] + (-xo).exp() * (-excess).exp_m1()).clamp(0.0, 1.0)
                }
            },
        }
    }

    pub fn ln_sf(&self, v: [f64; 2]) -> f64 {
        let m = self.marginals();
        match (v[0] > 0.0, v[1] > 0.0) {
            (false, false) => 0.0,
            (true, false) => m[0].ln_sf(v[0]),
            (false, true) => m[1].ln_sf(v[1]),
            (true, true) => self.sf(v).ln(),
        }
    }

    /// ln D_j(v) with D_j = −∂S/∂v_j; −∞ when v_j = 0.
    pub fn ln_partial(&self, ty: EventType, v: [f64; 2]) -> f64 {
        let j = ty.index();
        let o = 1 - j;
        if !(v[j] > 0.0) {
            return f64::NEG_INFINITY;
        }
        let m = self.marginals();
        let ln_f = m[j].ln_pdf(v[j]);
        if !(v[o] > 0.0) {
            return ln_f;
        }
        let ln_tail = match self {
            GapLaw::Mln { marginals, chol, .. } => {
                let (slope, var) = chol.conditional(j);
                let mc = marginals[o].mu + slope * (v[j].ln() - marginals[j].mu);
                log_std_normal_cdf(-(v[o].ln() - mc) / var.sqrt())
            }
            GapLaw::Copula { alpha, .. } => {
                if *alpha == 1.0 {
                    m[o].ln_sf(v[o])
                } else {
                    let x = -log_std_normal_cdf(m[j].z(v[j]));
                    let y = -log_std_normal_cdf(m[o].z(v[o]));
                    gumbel::ln_one_minus_partial_xy(x, y, *alpha)
                }
            }
        };
        ln_f + ln_tail
    }

    pub fn partial(&self, ty: EventType, v: [f64; 2]) -> f64 {
        self.ln_partial(ty, v).exp()
    }

    /// Joint density f_W(v) for v > 0.
    pub fn pdf(&self, v: [f64; 2]) -> f64 {
        if !(v[0] > 0.0 && v[1] > 0.0) {
            return 0.0;
        }
        let m = self.marginals();
        match self {
            GapLaw::Mln { rho, .. } => {
                let (z1, z2) = (m[0].z(v[0]), m[1].z(v[1]));
                let one_m = 1.0 - rho * rho;
                let q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / one_m;
                let ln = -0.5 * q - 0.5 * one_m.ln() + 2.0 * log_std_normal_pdf(0.0)
                    - (m[0].sigma * v[0]).ln()
                    - (m[1].sigma * v[1]).ln();
                ln.exp()
            }
            GapLaw::Copula { alpha, .. } => {
                gumbel::gumbel_density(m[0].cdf(v[0]), m[1].cdf(v[1]), *alpha)
                    * m[0].pdf(v[0])
                    * m[1].pdf(v[1])
            }
        }
    }
}

/// μ(x) = μ₀ + Bx.
pub fn location_adjust(model: &ModelSpec, x: [f64; 2]) -> [f64; 2] {
    model.location_adjust(x)
}

/// S(v) = Pr(W1 > v1, W2 > v2) under covariates `x`.
pub fn joint_sf(model: &ModelSpec, v: GapVector, x: [f64; 2]) -> f64 {
    model.at(x).sf(v.as_array())
}

/// D_j(a⁻) = −∂S/∂v_j at the pre-event age vector.
pub fn survival_partial(
    model: &ModelSpec,
    ty: EventType,
    a_pre: [f64; 2],
    x: [f64; 2],
) -> Result<f64> {
    let j = ty.index();
    if !(a_pre[j] > 0.0) {
        return Err(CarpError::Domain(format!(
            "age of the differentiated component must be positive, got {}",
            a_pre[j]
        )));
    }
    if !(a_pre[1 - j] >= 0.0) {
        return Err(CarpError::Domain(format!(
            "age {} must be nonnegative",
            a_pre[1 - j]
        )));
    }
    Ok(model.at(x).partial(ty, a_pre))
}

/// f(v | W ≥ a, x) = f_W(v) / S(a).
pub fn conditional_gap_density(
    model: &ModelSpec,
    v: GapVector,
    a: [f64; 2],
    x: [f64; 2],
) -> Result<f64> {
    if !v.dominates(a) {
        return Err(CarpError::Domain(format!(
            "gap {:?} below age {a:?}",
            v.as_array()
        )));
    }
    let law = model.at(x);
    let s = law.sf(a);
    if s <= 0.0 {
        return Err(CarpError::DeepTail {
            survival: s,
            age: a,
        });
    }
    Ok(law.pdf(v.as_array()) / s)
}

/// Pre-age vector and covariate snapshot in force at time `t` (left limit).
fn state_at(history: &EventHistory, t: f64) -> ([f64; 2], [f64; 2]) {
    let events = history.events();
    let k = events.partition_point(|e| e.time < t);
    let mut post = [0.0f64; 2];
    let mut last = 0.0;
    for e in &events[..k] {
        let dt = e.time - last;
        post = [post[0] + dt, post[1] + dt];
        post[e.event_type.index()] = 0.0;
        last = e.time;
    }
    let dt = t - last;
    ([post[0] + dt, post[1] + dt], history.snapshot_after(k))
}

/// h_j(t) = D_j(a⁻(t)) / S(a⁻(t)) with the covariate snapshot in force.
pub fn sub_intensity(
    model: &ModelSpec,
    ty: EventType,
    t: f64,
    history: &EventHistory,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(CarpError::Domain(format!("time {t} must be positive")));
    }
    let (a, x) = state_at(history, t);
    Ok(intensity_at(&model.at(x), ty, a))
}

fn intensity_at(law: &GapLaw, ty: EventType, a: [f64; 2]) -> f64 {
    if !(a[ty.index()] > 0.0) {
        return 0.0;
    }
    let v = (law.ln_partial(ty, a) - law.ln_sf(a)).exp();
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Piecewise-linear samples of H_j(t) on [0, κ].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeIntensity {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CumulativeIntensity {
    /// H_j(t) by linear interpolation between knots; constant past κ.
    pub fn eval(&self, t: f64) -> f64 {
        if self.times.is_empty() || t <= self.times[0] {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let k = self.times.partition_point(|&s| s < t);
        if k >= self.times.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (h0, h1) = (self.values[k - 1], self.values[k]);
        if t1 == t0 {
            h1
        } else {
            h0 + (h1 - h0) * (t - t0) / (t1 - t0)
        }
    }

    pub fn terminal(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Panels per inter-event interval when no step is given.
pub const DEFAULT_PANELS: usize = 64;

/// H_j(t) = ∫₀ᵗ h_j(s) ds by composite trapezoid on each inter-event
/// interval. Each interval gets at least [`DEFAULT_PANELS`] panels, and with
/// `step` given, enough more that no panel is wider than `step`.
pub fn cumulative_intensity(
    model: &ModelSpec,
    ty: EventType,
    history: &EventHistory,
    step: Option<f64>,
) -> Result<CumulativeIntensity> {
    if let Some(s) = step {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CarpError::Domain(format!("grid step {s} must be positive")));
        }
    }
    let ages = age_trajectory(history);
    let events = history.events();
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let mut total = 0.0;
    let mut start = 0.0;
    for k in 0..=events.len() {
        let end = if k < events.len() {
            events[k].time
        } else {
            history.termination()
        };
        let len = end - start;
        if len > 0.0 {
            let law = model.at(history.snapshot_after(k));
            let post = ages[k].post;
            let panels = match step {
                None => DEFAULT_PANELS,
                Some(s) => ((len / s).ceil() as usize).max(DEFAULT_PANELS),
            };
            let dt = len / panels as f64;
            let h = |s: f64| intensity_at(&law, ty, [post[0] + s, post[1] + s]);
            let mut prev = h(0.0);
            for p in 1..=panels {
                let s = if p == panels { len } else { p as f64 * dt };
                let cur = h(s);
                total += 0.5 * (prev + cur) * dt;
                prev = cur;
                times.push(start + s);
                values.push(total);
            }
        }
        start = end;
    }
    Ok(CumulativeIntensity { times, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::RawEvent;
    use proptest::prelude::*;

    const B_PAPER: Matrix2 = [[1.5, 0.0], [0.0, 0.1]];

    fn mln(eta: f64) -> ModelSpec {
        ModelSpec::mln([1.0, 1.5], 0.25, eta, 0.25, B_PAPER).unwrap()
    }

    fn cop(alpha: f64) -> ModelSpec {
        ModelSpec::copula([1.0, 1.5], [0.25, 0.25], alpha, B_PAPER).unwrap()
    }

    #[test]
    fn copula_survival_matches_high_precision() {
        // 1 − F1 − F2 + C evaluated with 50 significant digits.
        let cases = [
            ([1.0, 1.5], [0.25, 0.25], 2.0, [6.0, 10.0], 0.000_417_005_232_027_182_84),
            ([1.0, 1.5], [0.25, 0.25], 1.5, [2.5, 4.0], 0.491_751_626_507_791_67),
            ([0.9, 0.55], [0.575, 0.347], 2.32, [2.4, 6.87], 3.612_186_877_440_268_1e-5),
        ];
        for (mu, sigma, alpha, v, want) in cases {
            let m = ModelSpec::copula(mu, sigma, alpha, [[0.0; 2]; 2]).unwrap();
            let got = m.at([0.0; 2]).sf(v);
            assert!((got - want).abs() < 1e-13 * want, "{v:?}: {got} vs {want}");
        }
    }

    #[test]
    fn location_adjust_examples() {
        assert_eq!(mln(0.1).location_adjust([1.0, 1.0]), [2.5, 1.6]);
        assert_eq!(cop(1.5).location_adjust([0.0, 0.0]), [1.0, 1.5]);
        let m = ModelSpec::mln([0.3, 0.4], 0.2, 0.0, 0.2, [[0.0; 2]; 2]).unwrap();
        assert_eq!(m.location_adjust([5.0, -2.0]), [0.3, 0.4]);
    }

    #[test]
    fn natural_vector_round_trip() {
        for m in [mln(0.1445), cop(1.5)] {
            let th = m.to_natural();
            assert_eq!(ModelSpec::from_natural(m.variant(), &th).unwrap(), m);
        }
        let th = mln(0.1445).to_natural();
        assert_eq!(th[4], 0.1445);
        assert_eq!(th[3], 0.25);
    }

    #[test]
    fn survival_near_origin_is_one() {
        let v = GapVector::new(1e-9, 1e-9).unwrap();
        for m in [mln(0.2), cop(2.0)] {
            assert!((joint_sf(&m, v, [0.3, 0.1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn copula_independence_factorizes() {
        let m = cop(1.0);
        let law = m.at([0.2, 0.5]);
        let v = [2.5, 5.0];
        let want = law.marginal(EventType::One).sf(v[0]) * law.marginal(EventType::Two).sf(v[1]);
        assert!((law.sf(v) - want).abs() < 1e-15);
        let d1 = survival_partial(&m, EventType::One, v, [0.2, 0.5]).unwrap();
        let want =
            law.marginal(EventType::One).pdf(v[0]) * law.marginal(EventType::Two).sf(v[1]);
        assert!((d1 - want).abs() < 1e-15 * want.max(1.0));
    }

    #[test]
    fn mln_independence_matches_copula_independence() {
        let (a, b) = (mln(0.0).at([0.4, 0.9]), cop(1.0).at([0.4, 0.9]));
        for v in [[1.0, 2.0], [3.0, 0.5], [7.0, 9.0]] {
            for ty in EventType::BOTH {
                let (da, db) = (a.partial(ty, v), b.partial(ty, v));
                assert!((da - db).abs() <= 1e-13 * da.max(1e-300), "{da} {db}");
            }
            assert!((a.sf(v) - b.sf(v)).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_rejects_zero_age() {
        assert!(survival_partial(&mln(0.1), EventType::One, [0.0, 1.0], [0.0; 2]).is_err());
        assert!(survival_partial(&mln(0.1), EventType::Two, [0.0, 1.0], [0.0; 2]).is_ok());
    }

    #[test]
    fn conditional_density_at_origin_is_joint_pdf() {
        let m = cop(1.7);
        let v = GapVector::new(2.0, 3.0).unwrap();
        let got = conditional_gap_density(&m, v, [0.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((got - m.at([0.0; 2]).pdf([2.0, 3.0])).abs() < 1e-15);
        assert!(conditional_gap_density(&m, v, [2.5, 0.0], [0.0, 0.0]).is_err());
    }

    #[test]
    fn independent_conditional_density_factorizes() {
        let m = mln(0.0);
        let law = m.at([0.0; 2]);
        let (m1, m2) = (law.marginal(EventType::One), law.marginal(EventType::Two));
        let a = [2.0, 1.0];
        let v = GapVector::new(3.0, 4.0).unwrap();
        let got = conditional_gap_density(&m, v, a, [0.0; 2]).unwrap();
        let want = m1.pdf(3.0) / m1.sf(2.0) * m2.pdf(4.0) / m2.sf(1.0);
        assert!((got - want).abs() < 1e-13 * want);
    }

    // Tensor Gauss–Legendre on a mapped domain: oracle for total mass.
    fn mass_above(model: &ModelSpec, a: [f64; 2], x: [f64; 2]) -> f64 {
        // Substitute v_j = a_j + exp(s_j), s_j in [-12, 4].
        let n = 400;
        let (lo, hi) = (-12.0f64, 4.5f64);
        let h = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let s1 = lo + i as f64 * h;
            let w1 = if i == 0 || i == n { 0.5 } else { 1.0 };
            for k in 0..=n {
                let s2 = lo + k as f64 * h;
                let w2 = if k == 0 || k == n { 0.5 } else { 1.0 };
                let v = GapVector::new(a[0] + s1.exp(), a[1] + s2.exp()).unwrap();
                let f = conditional_gap_density(model, v, a, x).unwrap();
                total += w1 * w2 * f * s1.exp() * s2.exp();
            }
        }
        total * h * h
    }

    #[test]
    fn conditional_density_integrates_to_one() {
        for m in [mln(0.1445), cop(1.5), ModelSpec::mln([1.0, 1.5], 0.3, -0.2, 0.4, B_PAPER).unwrap()] {
            for a in [[0.0, 0.0], [3.0, 0.0], [0.0, 4.0], [2.0, 2.5]] {
                let mass = mass_above(&m, a, [0.2, 0.3]);
                assert!((mass - 1.0).abs() < 1e-4, "{:?} a={a:?}: {mass}", m.variant());
            }
        }
    }

    #[test]
    fn reparameterization_identity() {
        let c = 4.0;
        let m = mln(0.2);
        let mut th = m.to_natural();
        for v in &mut th[5..] {
            *v /= c;
        }
        let scaled = ModelSpec::from_natural(Variant::Mln, &th).unwrap();
        let x = [0.3, 0.8];
        let a = m.at(x);
        let b = scaled.at([x[0] * c, x[1] * c]);
        for v in [[1.0, 2.0], [4.0, 6.0]] {
            assert!((a.sf(v) - b.sf(v)).abs() < 1e-14);
            assert!((a.partial(EventType::Two, v) - b.partial(EventType::Two, v)).abs() < 1e-14);
        }
    }

    fn history() -> EventHistory {
        EventHistory::from_timed_durations(
            [
                (2.1, EventType::One, 0.4),
                (3.0, EventType::Two, 1.1),
                (6.5, EventType::One, 0.3),
            ],
            Some(8.0),
        )
        .unwrap()
    }

    #[test]
    fn sub_intensity_identity_and_sum() {
        let h = history();
        for m in [mln(0.1445), cop(1.5)] {
            for &t in &[0.5, 2.1, 2.5, 4.0, 6.6, 7.9] {
                let (a, x) = state_at(&h, t);
                let law = m.at(x);
                let s = law.sf(a);
                for ty in EventType::BOTH {
                    let hj = sub_intensity(&m, ty, t, &h).unwrap();
                    if a[ty.index()] > 0.0 {
                        let d = law.partial(ty, a);
                        assert!((hj * s - d).abs() < 1e-10 * d.max(1e-300) + 1e-300);
                    }
                    assert!(hj >= 0.0);
                }
            }
        }
        assert!(sub_intensity(&mln(0.0), EventType::One, 0.0, &h).is_err());
    }

    #[test]
    fn independent_sub_intensity_is_marginal_hazard() {
        let h = history();
        let m = mln(0.0);
        let t = 4.0;
        let (a, x) = state_at(&h, t);
        assert_eq!(a, [1.9, 1.0]);
        assert_eq!(x, [0.4, 1.1]);
        let want = m.at(x).marginal(EventType::One).hazard(a[0]);
        let got = sub_intensity(&m, EventType::One, t, &h).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn cumulative_intensity_without_events_is_minus_log_sf() {
        let h = EventHistory::from_raw(&[] as &[RawEvent], 10.0).unwrap();
        let m = cop(1.0);
        let ci = cumulative_intensity(&m, EventType::One, &h, Some(0.001)).unwrap();
        let want = -m.at([0.0; 2]).marginal(EventType::One).ln_sf(10.0);
        assert!((ci.terminal() - want).abs() < 1e-5 * want, "{} {want}", ci.terminal());
        let empty = cumulative_intensity(&m, EventType::Two, &EventHistory::empty(), None).unwrap();
        assert_eq!(empty.terminal(), 0.0);
        assert_eq!(empty.eval(3.0), 0.0);
    }

    #[test]
    fn cumulative_intensity_step_refinement() {
        let h = history();
        for m in [mln(0.1445), cop(1.5)] {
            for ty in EventType::BOTH {
                let a = cumulative_intensity(&m, ty, &h, Some(0.02)).unwrap().terminal();
                let b = cumulative_intensity(&m, ty, &h, Some(0.01)).unwrap().terminal();
                assert!(((a - b) / b).abs() < 1e-3);
                let ci = cumulative_intensity(&m, ty, &h, None).unwrap();
                assert!(ci.values.windows(2).all(|w| w[1] >= w[0]));
                assert!((ci.eval(h.termination()) - ci.terminal()).abs() < 1e-15);
            }
        }
    }

    fn arb_model() -> impl Strategy<Value = ModelSpec> {
        (
            -1.0f64..2.0,
            -1.0f64..2.0,
            0.1f64..1.0,
            0.1f64..1.0,
            -0.8f64..0.8,
            1.0f64..4.0,
            prop::bool::ANY,
        )
            .prop_map(|(m1, m2, s1, s2, eta, alpha, is_mln)| {
                if is_mln {
                    ModelSpec::mln([m1, m2], s1, eta, s2, [[0.0; 2]; 2]).unwrap()
                } else {
                    ModelSpec::copula([m1, m2], [s1, s2], alpha, [[0.0; 2]; 2]).unwrap()
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sf_nonincreasing(m in arb_model(), v1 in 0.05f64..20.0, v2 in 0.05f64..20.0, d in 0.0f64..3.0) {
            let law = m.at([0.0; 2]);
            let s = law.sf([v1, v2]);
            prop_assert!(law.sf([v1 + d, v2]) <= s + 1e-14);
            prop_assert!(law.sf([v1, v2 + d]) <= s + 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn partials_match_finite_differences(m in arb_model(), v1 in 0.3f64..15.0, v2 in 0.3f64..15.0) {
            let law = m.at([0.0; 2]);
            let v = [v1, v2];
            let mut diag = 0.0;
            for ty in EventType::BOTH {
                let j = ty.index();
                let h = 1e-5 * v[j];
                let (mut up, mut dn) = (v, v);
                up[j] += h;
                dn[j] -= h;
                let fd = -(law.sf(up) - law.sf(dn)) / (2.0 * h);
                let d = law.partial(ty, v);
                prop_assert!(d >= 0.0);
                prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1e-3), "{:?} {} vs {}", ty, d, fd);
                diag += d;
            }
            let h = 1e-5;
            let fd = -(law.sf([v1 + h, v2 + h]) - law.sf([v1 - h, v2 - h])) / (2.0 * h);
            prop_assert!((diag - fd).abs() <= 1e-6 * diag.max(1e-3));
        }

        #[test]
        fn conditional_density_nonnegative(m in arb_model(), v1 in 0.01f64..30.0, v2 in 0.01f64..30.0) {
            let v = GapVector::new(v1, v2).unwrap();
            let f = conditional_gap_density(&m, v, [0.0, 0.0], [0.0; 2]).unwrap();
            prop_assert!(f >= 0.0 && f.is_finite());
        }
    }
}
