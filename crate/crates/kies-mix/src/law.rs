//! Probability laws for the randomized scale parameter λ.
//!
//! Each law carries its moment generating function `ψ(x) = E[e^{xλ}]` on
//! `x <= 0`, the derivative `ψ'`, the mean, the negative moment
//! `E[λ^{-1/β}]` (with divergence detection), and an exact sampler. An
//! affine wrapper `λ = aξ + b` composes with every base family via
//! `ψ_{aξ+b}(x) = e^{bx} ψ_ξ(ax)`.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::special::{beta_fn, hyp1f1, hyp1f1_deriv, ln_gamma};

/// One atom of a discrete λ-table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteComponent {
    pub lambda: f64,
    pub weight: f64,
}

/// The distribution of the mixing parameter λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum MixingLaw {
    /// λ fixed at a single positive value.
    Degenerate { lambda: f64 },
    /// Finite table of positive atoms with weights summing to one.
    #[serde(rename = "discrete")]
    DiscreteTable { components: Vec<DiscreteComponent> },
    /// λ = 1 + Binomial(n, p); the unit shift keeps λ positive.
    ShiftedBinomial { n: u32, p: f64 },
    /// Geometric on {1, 2, ...} with success probability p.
    Geometric { p: f64 },
    /// Exponential with intensity θ (density θ e^{-θx}).
    Exponential { theta: f64 },
    /// Gamma with shape α and rate θ.
    Gamma { alpha: f64, theta: f64 },
    /// Beta on (0,1) with parameters (α, θ).
    #[serde(rename = "beta")]
    BetaLaw { alpha: f64, theta: f64 },
    /// λ = a·ξ + b over a base law ξ; nesting another affine is rejected.
    Affine { a: f64, b: f64, inner: Box<MixingLaw> },
}

/// Outcome of the negative-moment check `E[λ^{-1/β}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NegMoment {
    Finite(f64),
    Divergent,
}

impl NegMoment {
    pub fn is_finite(&self) -> bool {
        matches!(self, NegMoment::Finite(_))
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;
// Tail truncation for geometric series sums.
const SERIES_TAIL: f64 = 1e-18;

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl MixingLaw {
    /// Check the structural invariants of the law.
    pub fn validate(&self) -> Result<()> {
        match self {
            MixingLaw::Degenerate { lambda } => require_positive("lambda", *lambda),
            MixingLaw::DiscreteTable { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter("discrete table is empty".into()));
                }
                let mut sum = 0.0;
                for c in components {
                    require_positive("component lambda", c.lambda)?;
                    require_positive("component weight", c.weight)?;
                    sum += c.weight;
                }
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "discrete weights sum to {sum}, expected 1"
                    )));
                }
                Ok(())
            }
            MixingLaw::ShiftedBinomial { n, p } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("binomial n must be >= 1".into()));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "binomial p must lie in (0,1), got {p}"
                    )));
                }
                Ok(())
            }
            MixingLaw::Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric p must lie in (0,1], got {p}"
                    )));
                }
                Ok(())
            }
            MixingLaw::Exponential { theta } => require_positive("theta", *theta),
            MixingLaw::Gamma { alpha, theta } => {
                require_positive("alpha", *alpha)?;
                require_positive("theta", *theta)
            }
            MixingLaw::BetaLaw { alpha, theta } => {
                require_positive("alpha", *alpha)?;
                require_positive("theta", *theta)
            }
            MixingLaw::Affine { a, b, inner } => {
                require_positive("a", *a)?;
                if !(*b >= 0.0) || !b.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "b must be non-negative and finite, got {b}"
                    )));
                }
                if matches!(**inner, MixingLaw::Affine { .. }) {
                    return Err(Error::InvalidParameter(
                        "affine laws cannot wrap another affine law".into(),
                    ));
                }
                inner.validate()
            }
        }
    }

    /// Moment generating function `E[e^{xλ}]` for `x <= 0`.
    pub fn mgf(&self, x: f64) -> Result<f64> {
        if x > 0.0 {
            return Err(Error::Domain(format!("mgf requires x <= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        Ok(match self {
            MixingLaw::Degenerate { lambda } => (x * lambda).exp(),
            MixingLaw::DiscreteTable { components } => components
                .iter()
                .map(|c| c.weight * (x * c.lambda).exp())
                .sum(),
            MixingLaw::ShiftedBinomial { n, p } => {
                let e = x.exp();
                e * (1.0 - p + p * e).powi(*n as i32)
            }
            MixingLaw::Geometric { p } => {
                let e = x.exp();
                p * e / (1.0 - (1.0 - p) * e)
            }
            MixingLaw::Exponential { theta } => theta / (theta - x),
            MixingLaw::Gamma { alpha, theta } => (theta / (theta - x)).powf(*alpha),
            MixingLaw::BetaLaw { alpha, theta } => hyp1f1(*alpha, alpha + theta, x)?,
            MixingLaw::Affine { a, b, inner } => {
                let base = inner.mgf(a * x)?;
                if *b == 0.0 {
                    base
                } else {
                    (b * x).exp() * base
                }
            }
        })
    }

    /// Derivative of the MGF: `E[λ e^{xλ}]` for `x <= 0`.
    pub fn mgf_deriv(&self, x: f64) -> Result<f64> {
        if x > 0.0 {
            return Err(Error::Domain(format!("mgf_deriv requires x <= 0, got {x}")));
        }
        Ok(match self {
            MixingLaw::Degenerate { lambda } => lambda * (x * lambda).exp(),
            MixingLaw::DiscreteTable { components } => components
                .iter()
                .map(|c| c.weight * c.lambda * (x * c.lambda).exp())
                .sum(),
            MixingLaw::ShiftedBinomial { n, p } => {
                let e = x.exp();
                let base = 1.0 - p + p * e;
                e * base.powi(*n as i32 - 1) * (base + *n as f64 * p * e)
            }
            MixingLaw::Geometric { p } => {
                let e = x.exp();
                let den = 1.0 - (1.0 - p) * e;
                p * e / (den * den)
            }
            MixingLaw::Exponential { theta } => theta / ((theta - x) * (theta - x)),
            MixingLaw::Gamma { alpha, theta } => {
                alpha * theta.powf(*alpha) / (theta - x).powf(alpha + 1.0)
            }
            MixingLaw::BetaLaw { alpha, theta } => hyp1f1_deriv(*alpha, alpha + theta, x)?,
            MixingLaw::Affine { a, b, inner } => {
                let scale = if *b == 0.0 { 1.0 } else { (b * x).exp() };
                scale * (b * inner.mgf(a * x)? + a * inner.mgf_deriv(a * x)?)
            }
        })
    }

    /// Expected value `E[λ]`; finite for every implemented family.
    pub fn mean(&self) -> f64 {
        match self {
            MixingLaw::Degenerate { lambda } => *lambda,
            MixingLaw::DiscreteTable { components } => {
                components.iter().map(|c| c.weight * c.lambda).sum()
            }
            MixingLaw::ShiftedBinomial { n, p } => 1.0 + *n as f64 * p,
            MixingLaw::Geometric { p } => 1.0 / p,
            MixingLaw::Exponential { theta } => 1.0 / theta,
            MixingLaw::Gamma { alpha, theta } => alpha / theta,
            MixingLaw::BetaLaw { alpha, theta } => alpha / (alpha + theta),
            MixingLaw::Affine { a, b, inner } => a * inner.mean() + b,
        }
    }

    /// Convergence rule of the negative moment `E[λ^{-1/β}]`, without
    /// computing its value.
    ///
    /// Discrete families always converge. The exponential law converges only
    /// for `β > 1`, gamma and beta only for `β > 1/α`. An affine transform
    /// with `b > 0` bounds the integrand and converges unconditionally; with
    /// `b = 0` the inner rule applies (scale does not matter).
    pub fn neg_moment_is_finite(&self, beta: f64) -> bool {
        match self {
            MixingLaw::Degenerate { .. }
            | MixingLaw::DiscreteTable { .. }
            | MixingLaw::ShiftedBinomial { .. }
            | MixingLaw::Geometric { .. } => true,
            MixingLaw::Exponential { .. } => beta > 1.0,
            MixingLaw::Gamma { alpha, .. } | MixingLaw::BetaLaw { alpha, .. } => {
                beta > 1.0 / alpha
            }
            MixingLaw::Affine { b, inner, .. } => *b > 0.0 || inner.neg_moment_is_finite(beta),
        }
    }

    /// Negative moment `E[λ^{-1/β}]`, flagging divergence per
    /// [`MixingLaw::neg_moment_is_finite`]. Closed forms where available,
    /// otherwise exact sums or quadrature against the inner density.
    pub fn neg_moment(&self, beta: f64) -> NegMoment {
        let r = 1.0 / beta; // exponent of 1/λ
        match self {
            MixingLaw::Degenerate { lambda } => NegMoment::Finite(lambda.powf(-r)),
            MixingLaw::DiscreteTable { components } => NegMoment::Finite(
                components
                    .iter()
                    .map(|c| c.weight * c.lambda.powf(-r))
                    .sum(),
            ),
            MixingLaw::ShiftedBinomial { n, p } => NegMoment::Finite(
                (0..=*n)
                    .map(|k| binomial_pmf(*n, k, *p) * (1.0 + k as f64).powf(-r))
                    .sum(),
            ),
            MixingLaw::Geometric { p } => NegMoment::Finite(geometric_expectation(*p, |lam| {
                lam.powf(-r)
            })),
            MixingLaw::Exponential { theta } => {
                if beta > 1.0 {
                    NegMoment::Finite(theta.powf(r) * ln_gamma(1.0 - r).expect("argument > 0").exp())
                } else {
                    NegMoment::Divergent
                }
            }
            MixingLaw::Gamma { alpha, theta } => {
                if beta > 1.0 / alpha {
                    let ln = ln_gamma(alpha - r).expect("argument > 0")
                        - ln_gamma(*alpha).expect("argument > 0");
                    NegMoment::Finite(theta.powf(r) * ln.exp())
                } else {
                    NegMoment::Divergent
                }
            }
            MixingLaw::BetaLaw { alpha, theta } => {
                if beta > 1.0 / alpha {
                    let v = beta_fn(alpha - r, *theta).expect("arguments > 0")
                        / beta_fn(*alpha, *theta).expect("arguments > 0");
                    NegMoment::Finite(v)
                } else {
                    NegMoment::Divergent
                }
            }
            MixingLaw::Affine { a, b, inner } => {
                if *b == 0.0 {
                    match inner.neg_moment(beta) {
                        NegMoment::Finite(v) => NegMoment::Finite(a.powf(-r) * v),
                        NegMoment::Divergent => NegMoment::Divergent,
                    }
                } else {
                    NegMoment::Finite(affine_neg_moment(inner, *a, *b, r))
                }
            }
        }
    }

    /// Draw one λ value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MixingLaw::Degenerate { lambda } => *lambda,
            MixingLaw::DiscreteTable { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight;
                    if u < acc {
                        return c.lambda;
                    }
                }
                components.last().expect("validated non-empty").lambda
            }
            MixingLaw::ShiftedBinomial { n, p } => {
                let d = rand_distr::Binomial::new(*n as u64, *p).expect("validated parameters");
                1.0 + d.sample(rng) as f64
            }
            MixingLaw::Geometric { p } => {
                if *p >= 1.0 {
                    return 1.0;
                }
                let u: f64 = rng.random();
                ((-u).ln_1p() / (1.0 - p).ln()).ceil().max(1.0)
            }
            MixingLaw::Exponential { theta } => {
                let u: f64 = rng.random();
                (-(-u).ln_1p() / theta).max(f64::MIN_POSITIVE)
            }
            MixingLaw::Gamma { alpha, theta } => {
                let d = rand_distr::Gamma::new(*alpha, 1.0 / theta).expect("validated parameters");
                d.sample(rng).max(f64::MIN_POSITIVE)
            }
            MixingLaw::BetaLaw { alpha, theta } => {
                let d = rand_distr::Beta::new(*alpha, *theta).expect("validated parameters");
                d.sample(rng).max(f64::MIN_POSITIVE)
            }
            MixingLaw::Affine { a, b, inner } => a * inner.sample(rng) + b,
        }
    }
}

/// Binomial probability mass computed through log-gamma for stability at
/// large `n`.
pub(crate) fn binomial_pmf(n: u32, k: u32, p: f64) -> f64 {
    let (n_f, k_f) = (n as f64, k as f64);
    let ln_choose = ln_gamma(n_f + 1.0).expect("positive")
        - ln_gamma(k_f + 1.0).expect("positive")
        - ln_gamma(n_f - k_f + 1.0).expect("positive");
    (ln_choose + k_f * p.ln() + (n_f - k_f) * (1.0 - p).ln()).exp()
}

/// `E[g(λ)]` for geometric λ and non-increasing positive `g`, truncated
/// once the exact remaining mass bound `g(λ) q^λ` drops below tolerance.
fn geometric_expectation<F: Fn(f64) -> f64>(p: f64, g: F) -> f64 {
    if p >= 1.0 {
        return g(1.0);
    }
    let q = 1.0 - p;
    let mut weight = p;
    let mut sum = 0.0;
    let mut lam = 1.0;
    loop {
        let term = weight * g(lam);
        sum += term;
        // Remaining contribution is at most g(λ) Σ_{i>λ} p q^{i-1} = g(λ) q^λ.
        if g(lam) * weight * q < SERIES_TAIL * p * sum.max(1.0) {
            break;
        }
        weight *= q;
        lam += 1.0;
    }
    sum
}

/// `E[(aξ + b)^{-r}]` with `b > 0` by quadrature against the inner density.
///
/// Endpoint density singularities (gamma/beta shapes below one) are handled
/// by splitting off analytically-approximated slivers of width `1e-10` and
/// integrating the rest in log coordinates, where the integrand is smooth.
fn affine_neg_moment(inner: &MixingLaw, a: f64, b: f64, r: f64) -> f64 {
    let g = |x: f64| (a * x + b).powf(-r);
    match inner {
        MixingLaw::Degenerate { lambda } => g(*lambda),
        MixingLaw::DiscreteTable { components } => {
            components.iter().map(|c| c.weight * g(c.lambda)).sum()
        }
        MixingLaw::ShiftedBinomial { n, p } => (0..=*n)
            .map(|k| binomial_pmf(*n, k, *p) * g(1.0 + k as f64))
            .sum(),
        MixingLaw::Geometric { p } => geometric_expectation(*p, g),
        MixingLaw::Exponential { theta } => gamma_weighted_expectation(1.0, *theta, g),
        MixingLaw::Gamma { alpha, theta } => gamma_weighted_expectation(*alpha, *theta, g),
        MixingLaw::BetaLaw { alpha, theta } => beta_weighted_expectation(*alpha, *theta, g),
        MixingLaw::Affine { .. } => unreachable!("affine nesting is rejected by validate"),
    }
}

const SLIVER: f64 = 1e-10;
const QUAD_TOL: f64 = 1e-11;

/// `E[g(X)]` for `X ~ Gamma(alpha, theta)` and bounded smooth `g`.
fn gamma_weighted_expectation<F: Fn(f64) -> f64>(alpha: f64, theta: f64, g: F) -> f64 {
    let ln_norm = alpha * theta.ln() - ln_gamma(alpha).expect("positive");
    // (0, SLIVER]: density ~ x^{alpha-1}, g ~ g(0).
    let head = g(0.0) * (ln_norm + alpha * SLIVER.ln() - alpha.ln()).exp();
    // [SLIVER, R] in v = ln x coordinates.
    let upper = (4.0 * alpha + 100.0) / theta;
    let body = integrate(
        |v: f64| {
            let x = v.exp();
            g(x) * (ln_norm + alpha * v - theta * x).exp()
        },
        SLIVER.ln(),
        upper.ln(),
        QUAD_TOL,
    );
    head + body
}

/// `E[g(X)]` for `X ~ Beta(alpha, theta)` and bounded smooth `g`.
fn beta_weighted_expectation<F: Fn(f64) -> f64>(alpha: f64, theta: f64, g: F) -> f64 {
    let ln_norm = -(ln_gamma(alpha).expect("positive") + ln_gamma(theta).expect("positive")
        - ln_gamma(alpha + theta).expect("positive"));
    let head = g(0.0) * (ln_norm + alpha * SLIVER.ln() - alpha.ln()).exp();
    let tail = g(1.0) * (ln_norm + theta * SLIVER.ln() - theta.ln()).exp();
    // [SLIVER, 1/2] in v = ln x, [1/2, 1-SLIVER] in u = ln(1-x).
    let left = integrate(
        |v: f64| {
            let x = v.exp();
            g(x) * (ln_norm + alpha * v + (theta - 1.0) * (1.0 - x).ln()).exp()
        },
        SLIVER.ln(),
        0.5f64.ln(),
        QUAD_TOL,
    );
    let right = integrate(
        |u: f64| {
            let one_minus_x = u.exp();
            let x = 1.0 - one_minus_x;
            g(x) * (ln_norm + (alpha - 1.0) * x.ln() + theta * u).exp()
        },
        SLIVER.ln(),
        0.5f64.ln(),
        QUAD_TOL,
    );
    head + tail + left + right
}
