//! Hausdorff saturation of a Kies mixture.
//!
//! The saturation is the Hausdorff distance (max-norm) between the CDF
//! graph and the Γ-shaped curve through (0,0)–(0,1)–(1,1). It is the unique
//! `d` with `F(d) + d = 1`, and can equally be computed by solving
//! `γ(x) = x[1/E[e^{-λ x^β}] - 1] = 1` for `x̄` and taking
//! `d = x̄/(x̄+1)`. Both routes are implemented and must agree; their
//! agreement is part of the test suite.

use crate::error::{Error, Result};
use crate::mixture::MixedKies;
use crate::numerics::bisect;

/// How a saturation value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Bisection on `F(d) + d - 1 = 0`.
    FixedPoint,
    /// Root of `γ(x) = 1`, then `d = x̄/(x̄+1)`.
    Algorithm1,
    /// Explicit `x̄ = θ^{1/(β+1)}` for exponential mixing.
    ClosedForm,
}

/// Solved saturation, with the residual of the defining equation and, for
/// finitely-supported mixing laws, the per-atom exponents `τᵢ = λᵢ x̄^{βᵢ}`
/// (which satisfy `d = Σ pᵢ e^{-τᵢ}`).
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationResult {
    pub x_bar: f64,
    pub d: f64,
    pub residual: f64,
    pub tau: Option<Vec<f64>>,
    pub method: Method,
}

const X_TOL: f64 = 1e-13;
const BRACKET_LIMIT: f64 = (1 << 20) as f64;

/// `γ(x) = x[1/E[e^{-λ x^β}] - 1]` for `x > 0`; increases from zero to
/// infinity.
pub fn gamma_of_x(m: &MixedKies, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("gamma_of_x requires x > 0, got {x}")));
    }
    let mean = m.neg_exp_mean(x);
    Ok(x * (1.0 / mean - 1.0))
}

fn result_for(m: &MixedKies, x_bar: f64, method: Method) -> SaturationResult {
    let d = x_bar / (x_bar + 1.0);
    let residual = m.cdf(d).expect("d inside (0,1)") + d - 1.0;
    let tau = m.atoms().map(|atoms| {
        atoms
            .iter()
            .map(|&(lambda, _, beta)| lambda * x_bar.powf(beta))
            .collect()
    });
    SaturationResult { x_bar, d, residual, tau, method }
}

/// Saturation via the defining fixed-point equation `F(d) + d = 1`.
///
/// `l(t) = F(t) + t - 1` increases from -1 to 1, so bisection on `[0, 1]`
/// always converges to the unique root.
pub fn saturation_fixed_point(m: &MixedKies) -> SaturationResult {
    let d = bisect(
        |t| m.cdf(t).expect("t inside [0,1]") + t - 1.0,
        0.0,
        1.0,
        X_TOL,
    );
    let x_bar = d / (1.0 - d);
    let mut r = result_for(m, x_bar, Method::FixedPoint);
    // Report the directly solved d, not the round-tripped one.
    r.d = d;
    r.residual = m.cdf(d).expect("d inside (0,1)") + d - 1.0;
    r
}

/// Saturation via the γ-equation: expand a bracket `[0, 2^k]` until
/// `γ` crosses one, bisect for `x̄`, then `d = x̄/(x̄+1)`.
pub fn saturation_algorithm1(m: &MixedKies) -> SaturationResult {
    let g = |x: f64| {
        if x <= 0.0 {
            -1.0
        } else {
            gamma_of_x(m, x).expect("x > 0") - 1.0
        }
    };
    let mut hi = 1.0;
    let mut lo = 0.0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        assert!(
            hi <= BRACKET_LIMIT,
            "gamma bracket expansion exceeded 2^20; law parameters out of range"
        );
    }
    let x_bar = bisect(g, lo, hi, X_TOL);
    result_for(m, x_bar, Method::Algorithm1)
}

/// Explicit saturation of the exponential mixture: `x̄ = θ^{1/(β+1)}`.
pub fn saturation_exponential_closed(theta: f64, beta: f64) -> Result<SaturationResult> {
    if !(theta > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "theta and beta must be positive, got ({theta}, {beta})"
        )));
    }
    let m = MixedKies::new(
        crate::law::MixingLaw::Exponential { theta },
        crate::mixture::BetaSpec::Fixed(beta),
    )?;
    let x_bar = theta.powf(1.0 / (beta + 1.0));
    Ok(result_for(&m, x_bar, Method::ClosedForm))
}
