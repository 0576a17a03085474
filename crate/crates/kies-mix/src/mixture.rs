//! Kies mixtures: distributions whose CDF is the λ-average of base Kies
//! CDFs, `F(t) = E[H(t; λ, β)]`.
//!
//! With deterministic β the CCDF is the mixing law's MGF evaluated at
//! `-(t/(1-t))^β`, which yields closed forms per family. Discrete tables
//! (optionally with per-component β) use explicit weighted sums. Every
//! family-specific form here is paired with the generic MGF route
//! ([`MixedKies::ccdf_mgf`], [`MixedKies::pdf_mgf`]) so the two can be
//! cross-checked; the family forms are the authoritative path.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kies::{hazard, kies_pdf_raw};
use crate::law::MixingLaw;
use crate::special::{hyp1f1, ln_gamma, ln_hyp1f1};

/// Shape parameter specification: one β for the whole mixture, or one per
/// component of a discrete table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Fixed(f64),
    PerComponent(Vec<f64>),
}

/// Plain serializable form of a mixture model: `{"law": ..., "beta": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub law: MixingLaw,
    pub beta: BetaSpec,
}

impl ModelSpec {
    /// Validate and build the executable model.
    pub fn build(self) -> Result<MixedKies> {
        MixedKies::new(self.law, self.beta)
    }
}

/// Report on the convergence conditions a mixture must satisfy: finiteness
/// of `E[λ^{-1/β}]` (density domination), `E[λ]`, and `E[λβ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub neg_moment_finite: bool,
    pub mean_finite: bool,
    pub mean_shape_product_finite: bool,
    /// Exponential λ with β = 1 fails the negative-moment condition yet
    /// still defines a distribution; such models are valid with a caveat
    /// (their density does not vanish at the right endpoint).
    pub unit_beta_exponential: bool,
}

impl ValidityReport {
    pub fn evaluate(law: &MixingLaw, beta: &BetaSpec) -> Self {
        let neg_moment_finite = match beta {
            // Finite sums of positive terms.
            BetaSpec::PerComponent(_) => true,
            BetaSpec::Fixed(b) => law.neg_moment_is_finite(*b),
        };
        let unit_beta_exponential = !neg_moment_finite
            && matches!(beta, BetaSpec::Fixed(b) if *b == 1.0)
            && exponential_intensity(law).is_some();
        ValidityReport {
            neg_moment_finite,
            // E[λ] and E[λβ] are finite for every implemented family.
            mean_finite: true,
            mean_shape_product_finite: true,
            unit_beta_exponential,
        }
    }

    pub fn is_valid(&self) -> bool {
        (self.neg_moment_finite || self.unit_beta_exponential)
            && self.mean_finite
            && self.mean_shape_product_finite
    }
}

/// If the law is exponential (directly or as a pure rescaling), its
/// effective intensity.
fn exponential_intensity(law: &MixingLaw) -> Option<f64> {
    match law {
        MixingLaw::Exponential { theta } => Some(*theta),
        MixingLaw::Affine { a, b, inner } if *b == 0.0 => match **inner {
            MixingLaw::Exponential { theta } => Some(theta / a),
            _ => None,
        },
        _ => None,
    }
}

/// Behaviour of the mixture density at a domain endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Zero,
    Finite(f64),
    Infinite,
}

/// A full mixture model: mixing law plus shape specification.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedKies {
    law: MixingLaw,
    beta: BetaSpec,
}

/// `(t/(1-t))^β` with saturation to `+inf` once the exponent range is
/// exhausted.
fn s_of(beta: f64, t: f64) -> f64 {
    hazard(1.0, beta, t)
}

impl MixedKies {
    pub fn new(law: MixingLaw, beta: BetaSpec) -> Result<Self> {
        law.validate()?;
        match &beta {
            BetaSpec::Fixed(b) => {
                if !(*b > 0.0) || !b.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "beta must be positive and finite, got {b}"
                    )));
                }
            }
            BetaSpec::PerComponent(betas) => {
                let MixingLaw::DiscreteTable { components } = &law else {
                    return Err(Error::InvalidModel(
                        "per-component beta requires a discrete table law".into(),
                    ));
                };
                if betas.len() != components.len() {
                    return Err(Error::InvalidModel(format!(
                        "{} beta values for {} components",
                        betas.len(),
                        components.len()
                    )));
                }
                for b in betas {
                    if !(*b > 0.0) || !b.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "beta must be positive and finite, got {b}"
                        )));
                    }
                }
            }
        }
        let report = ValidityReport::evaluate(&law, &beta);
        if !report.is_valid() {
            return Err(Error::InvalidModel(
                "negative moment E[lambda^(-1/beta)] diverges for this law/beta combination"
                    .into(),
            ));
        }
        Ok(Self { law, beta })
    }

    pub fn law(&self) -> &MixingLaw {
        &self.law
    }

    pub fn beta_spec(&self) -> &BetaSpec {
        &self.beta
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec { law: self.law.clone(), beta: self.beta.clone() }
    }

    pub fn validity(&self) -> ValidityReport {
        ValidityReport::evaluate(&self.law, &self.beta)
    }

    /// The exceptional exponential family with β = 1, whose density tends to
    /// the intensity (not zero) at the right endpoint.
    pub fn is_unit_beta_exponential(&self) -> bool {
        self.validity().unit_beta_exponential
    }

    /// `E[e^{-λ x^β}]` for `x >= 0`; the building block of both the CCDF and
    /// the saturation equation.
    pub(crate) fn neg_exp_mean(&self, x: f64) -> f64 {
        match &self.beta {
            BetaSpec::Fixed(beta) => self
                .law
                .mgf(-x.powf(*beta))
                .expect("non-positive argument"),
            BetaSpec::PerComponent(betas) => {
                let MixingLaw::DiscreteTable { components } = &self.law else {
                    unreachable!("validated at construction")
                };
                components
                    .iter()
                    .zip(betas)
                    .map(|(c, b)| c.weight * (-c.lambda * x.powf(*b)).exp())
                    .sum()
            }
        }
    }

    /// Atoms `(λᵢ, pᵢ, βᵢ)` when the mixing law is supported on finitely
    /// many points (directly or through an affine transform).
    pub fn atoms(&self) -> Option<Vec<(f64, f64, f64)>> {
        fn law_atoms(law: &MixingLaw) -> Option<Vec<(f64, f64)>> {
            match law {
                MixingLaw::Degenerate { lambda } => Some(vec![(*lambda, 1.0)]),
                MixingLaw::DiscreteTable { components } => {
                    Some(components.iter().map(|c| (c.lambda, c.weight)).collect())
                }
                MixingLaw::ShiftedBinomial { n, p } => Some(
                    (0..=*n)
                        .map(|k| (1.0 + k as f64, crate::law::binomial_pmf(*n, k, *p)))
                        .collect(),
                ),
                MixingLaw::Affine { a, b, inner } => Some(
                    law_atoms(inner)?
                        .into_iter()
                        .map(|(lam, w)| (a * lam + b, w))
                        .collect(),
                ),
                _ => None,
            }
        }
        let atoms = law_atoms(&self.law)?;
        Some(match &self.beta {
            BetaSpec::Fixed(b) => atoms.into_iter().map(|(lam, w)| (lam, w, *b)).collect(),
            BetaSpec::PerComponent(betas) => atoms
                .into_iter()
                .zip(betas)
                .map(|((lam, w), b)| (lam, w, *b))
                .collect(),
        })
    }

    /// Draw one `(λ, β)` pair, consistent across components.
    pub(crate) fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match &self.beta {
            BetaSpec::Fixed(beta) => (self.law.sample(rng), *beta),
            BetaSpec::PerComponent(betas) => {
                let MixingLaw::DiscreteTable { components } = &self.law else {
                    unreachable!("validated at construction")
                };
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (c, b) in components.iter().zip(betas) {
                    acc += c.weight;
                    if u < acc {
                        return (c.lambda, *b);
                    }
                }
                (components.last().expect("non-empty").lambda, *betas.last().expect("non-empty"))
            }
        }
    }

    fn check_closed(&self, t: f64) -> Result<()> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain(format!("t = {t} outside [0, 1]")))
        }
    }

    /// Mixture CDF on `[0, 1]`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.ccdf(t)?)
    }

    /// Mixture CCDF on `[0, 1]`, evaluated through the family's dedicated
    /// closed form (never as `1 - cdf`).
    pub fn ccdf(&self, t: f64) -> Result<f64> {
        self.check_closed(t)?;
        if t == 0.0 {
            return Ok(1.0);
        }
        if t == 1.0 {
            return Ok(0.0);
        }
        match &self.beta {
            BetaSpec::PerComponent(betas) => {
                let MixingLaw::DiscreteTable { components } = &self.law else {
                    unreachable!("validated at construction")
                };
                Ok(components
                    .iter()
                    .zip(betas)
                    .map(|(c, b)| c.weight * (-c.lambda * s_of(*b, t)).exp())
                    .sum())
            }
            BetaSpec::Fixed(beta) => Ok(family_ccdf(&self.law, s_of(*beta, t))),
        }
    }

    /// Generic MGF route for the CCDF (`ψ_λ(-(t/(1-t))^β)`); cross-check
    /// surface for [`MixedKies::ccdf`].
    pub fn ccdf_mgf(&self, t: f64) -> Result<f64> {
        self.check_closed(t)?;
        Ok(self.neg_exp_mean(t / (1.0 - t)))
    }

    /// Mixture density on the open interval `(0, 1)`. Endpoint behaviour is
    /// reported by [`MixedKies::left_endpoint`] / [`MixedKies::right_endpoint`].
    pub fn pdf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("t = {t} outside (0, 1)")));
        }
        match &self.beta {
            BetaSpec::PerComponent(betas) => {
                let MixingLaw::DiscreteTable { components } = &self.law else {
                    unreachable!("validated at construction")
                };
                Ok(components
                    .iter()
                    .zip(betas)
                    .map(|(c, b)| c.weight * kies_pdf_raw(c.lambda, *b, t))
                    .sum())
            }
            BetaSpec::Fixed(beta) => {
                let s = s_of(*beta, t);
                if s.is_infinite() {
                    // Far enough into the right tail that every family's
                    // density underflows.
                    return Ok(0.0);
                }
                // ln[β t^{β-1} (1-t)^{-β-1}]
                let ln_pre = beta.ln() + (beta - 1.0) * t.ln() - (beta + 1.0) * (1.0 - t).ln();
                Ok(family_ln_pdf_factor(&self.law, s).map_or(0.0, |f| (ln_pre + f).exp()))
            }
        }
    }

    /// Generic MGF route for the density
    /// (`β t^{β-1}(1-t)^{-β-1} ψ'_λ(-(t/(1-t))^β)`); cross-check surface for
    /// [`MixedKies::pdf`]. Only defined for deterministic β.
    pub fn pdf_mgf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("t = {t} outside (0, 1)")));
        }
        let BetaSpec::Fixed(beta) = &self.beta else {
            return Err(Error::Domain(
                "the MGF density route requires deterministic beta".into(),
            ));
        };
        let s = s_of(*beta, t);
        if s.is_infinite() {
            return Ok(0.0);
        }
        let deriv = self.law.mgf_deriv(-s)?;
        let ln_pre = beta.ln() + (beta - 1.0) * t.ln() - (beta + 1.0) * (1.0 - t).ln();
        Ok((ln_pre + deriv.ln()).exp())
    }

    /// Density limit at `t → 0`, decided by where the β-mass sits relative
    /// to one.
    pub fn left_endpoint(&self) -> Endpoint {
        match &self.beta {
            BetaSpec::Fixed(beta) => {
                if *beta > 1.0 {
                    Endpoint::Zero
                } else if *beta == 1.0 {
                    Endpoint::Finite(self.law.mean())
                } else {
                    Endpoint::Infinite
                }
            }
            BetaSpec::PerComponent(betas) => {
                let MixingLaw::DiscreteTable { components } = &self.law else {
                    unreachable!("validated at construction")
                };
                if betas.iter().any(|b| *b < 1.0) {
                    return Endpoint::Infinite;
                }
                let unit_mass: f64 = components
                    .iter()
                    .zip(betas)
                    .filter(|(_, b)| **b == 1.0)
                    .map(|(c, _)| c.weight * c.lambda)
                    .sum();
                if betas.iter().any(|b| *b == 1.0) {
                    Endpoint::Finite(unit_mass)
                } else {
                    Endpoint::Zero
                }
            }
        }
    }

    /// Density limit at `t → 1`: zero except for the exceptional unit-β
    /// exponential family (limit = intensity) and beta laws at or below the
    /// critical shape `β = 1/α`.
    pub fn right_endpoint(&self) -> Endpoint {
        if let Some(theta) = exponential_intensity(&self.law) {
            if matches!(self.beta, BetaSpec::Fixed(b) if b == 1.0) {
                return Endpoint::Finite(theta);
            }
        }
        if let (MixingLaw::BetaLaw { alpha, theta }, BetaSpec::Fixed(beta)) =
            (&self.law, &self.beta)
        {
            return beta_law_right_endpoint(*alpha, *theta, *beta);
        }
        Endpoint::Zero
    }
}

/// Right-endpoint trichotomy of a pure beta-law mixture: infinite below the
/// critical shape `β = 1/α`, `αβ Γ(α+θ)/Γ(θ)` at it, zero above it.
pub fn beta_law_right_endpoint(alpha: f64, theta: f64, beta: f64) -> Endpoint {
    let critical = 1.0 / alpha;
    if beta < critical {
        Endpoint::Infinite
    } else if beta == critical {
        let v = alpha
            * beta
            * (ln_gamma(alpha + theta).expect("positive") - ln_gamma(theta).expect("positive"))
                .exp();
        Endpoint::Finite(v)
    } else {
        Endpoint::Zero
    }
}

/// Family CCDF as a function of `s = (t/(1-t))^β`; equals `ψ_λ(-s)` with
/// each family's closed form written so that `s → inf` degrades gracefully
/// to zero.
fn family_ccdf(law: &MixingLaw, s: f64) -> f64 {
    match law {
        MixingLaw::Degenerate { lambda } => (-lambda * s).exp(),
        MixingLaw::DiscreteTable { components } => components
            .iter()
            .map(|c| c.weight * (-c.lambda * s).exp())
            .sum(),
        MixingLaw::ShiftedBinomial { n, p } => {
            let e = (-s).exp();
            e * (1.0 - p + p * e).powi(*n as i32)
        }
        MixingLaw::Geometric { p } => {
            // p / (e^s + p - 1), rewritten to avoid the e^s overflow.
            let e = (-s).exp();
            p * e / (1.0 + (p - 1.0) * e)
        }
        MixingLaw::Exponential { theta } => theta / (theta + s),
        MixingLaw::Gamma { alpha, theta } => (theta / (theta + s)).powf(*alpha),
        MixingLaw::BetaLaw { alpha, theta } => {
            hyp1f1(*alpha, alpha + theta, -s).expect("validated parameters")
        }
        MixingLaw::Affine { a, b, inner } => {
            let base = family_ccdf(inner, a * s);
            if *b == 0.0 {
                base
            } else {
                (-b * s).exp() * base
            }
        }
    }
}

/// `ln` of the family-specific factor that multiplies
/// `β t^{β-1}(1-t)^{-β-1}` in the mixture density, as a function of finite
/// `s`. `None` encodes a zero factor.
fn family_ln_pdf_factor(law: &MixingLaw, s: f64) -> Option<f64> {
    let finite_ln = |v: f64| if v > 0.0 { Some(v.ln()) } else { None };
    match law {
        MixingLaw::Degenerate { lambda } => Some(lambda.ln() - lambda * s),
        MixingLaw::DiscreteTable { components } => {
            let sum: f64 = components
                .iter()
                .map(|c| c.weight * c.lambda * (-c.lambda * s).exp())
                .sum();
            finite_ln(sum)
        }
        MixingLaw::ShiftedBinomial { n, p } => {
            let e = (-s).exp();
            let base = 1.0 - p + p * e;
            Some(
                -s + (*n as f64 - 1.0) * base.ln()
                    + (1.0 - p + p * (*n as f64 + 1.0) * e).ln(),
            )
        }
        MixingLaw::Geometric { p } => {
            let e = (-s).exp();
            Some(p.ln() - s - 2.0 * (1.0 + (p - 1.0) * e).ln())
        }
        MixingLaw::Exponential { theta } => Some(theta.ln() - 2.0 * (theta + s).ln()),
        MixingLaw::Gamma { alpha, theta } => {
            Some(alpha.ln() + alpha * theta.ln() - (alpha + 1.0) * (theta + s).ln())
        }
        MixingLaw::BetaLaw { alpha, theta } => Some(
            (alpha / (alpha + theta)).ln()
                + ln_hyp1f1(alpha + 1.0, alpha + theta + 1.0, -s).expect("validated parameters"),
        ),
        MixingLaw::Affine { a, b, inner } => affine_ln_pdf_factor(inner, *a, *b, s),
    }
}

/// Affine-transformed densities, `λ = aξ + b`. These are the closed forms
/// obtained from `ψ'_{aξ+b}(-s) = e^{-bs}[b ψ_ξ(-as) + a ψ'_ξ(-as)]`,
/// expanded per family.
fn affine_ln_pdf_factor(inner: &MixingLaw, a: f64, b: f64, s: f64) -> Option<f64> {
    match inner {
        MixingLaw::Degenerate { lambda } => {
            let lam = a * lambda + b;
            Some(lam.ln() - lam * s)
        }
        MixingLaw::DiscreteTable { components } => {
            let sum: f64 = components
                .iter()
                .map(|c| {
                    let lam = a * c.lambda + b;
                    c.weight * lam * (-lam * s).exp()
                })
                .sum();
            if sum > 0.0 {
                Some(sum.ln())
            } else {
                None
            }
        }
        // λ = a·(1 + Bin(n, p)) + b is the affine binomial form with total
        // shift a + b.
        MixingLaw::ShiftedBinomial { n, p } => {
            let shift = a + b;
            let e = (-a * s).exp();
            let base = 1.0 - p + p * e;
            Some(
                -shift * s
                    + (*n as f64 - 1.0) * base.ln()
                    + (shift * (1.0 - p) + p * (*n as f64 * a + shift) * e).ln(),
            )
        }
        MixingLaw::Geometric { p } => {
            let e = (-a * s).exp();
            let bracket = (a + b) - b * (1.0 - p) * e;
            Some(p.ln() - (a + b) * s + bracket.ln() - 2.0 * (1.0 + (p - 1.0) * e).ln())
        }
        MixingLaw::Exponential { theta } => {
            let den = theta + a * s;
            Some(theta.ln() - b * s + (b * den + a).ln() - 2.0 * den.ln())
        }
        MixingLaw::Gamma { alpha, theta } => {
            let den = theta + a * s;
            Some(
                alpha * theta.ln() - b * s + (b * den + a * alpha).ln()
                    - (alpha + 1.0) * den.ln(),
            )
        }
        MixingLaw::BetaLaw { alpha, theta } => {
            let slope = alpha * a / (alpha + theta);
            let ln_f2 = ln_hyp1f1(alpha + 1.0, alpha + theta + 1.0, -a * s)
                .expect("validated parameters");
            if b == 0.0 {
                Some(slope.ln() + ln_f2)
            } else {
                let f1 = hyp1f1(*alpha, alpha + theta, -a * s).expect("validated parameters");
                let bracket = b * f1 + slope * ln_f2.exp();
                if bracket > 0.0 {
                    Some(-b * s + bracket.ln())
                } else {
                    None
                }
            }
        }
        MixingLaw::Affine { .. } => unreachable!("affine nesting is rejected by validate"),
    }
}
