//! Kies distributions on `(0,1)` and their mixtures.
//!
//! The crate provides:
//!
//! - the base Kies distribution (CDF/CCDF/PDF/quantile) and the shape
//!   classification of its density ([`kies`]);
//! - mixing laws for a randomized scale parameter λ, with MGFs,
//!   negative-moment checks, and exact samplers ([`law`]);
//! - the resulting mixture distributions, evaluated through per-family
//!   closed forms backed by a generic MGF route ([`mixture`]);
//! - Hausdorff-saturation solvers: the fixed point of `F(d) + d = 1` and
//!   the γ-equation root, plus the exponential closed form ([`saturation`]);
//! - reproducible two-stage sampling and quantiles ([`sampling`]);
//! - a histogram calibration pipeline with a multi-start derivative-free
//!   optimizer ([`fitting`]);
//! - the special functions those need, notably `₁F₁` on non-positive
//!   arguments ([`special`]).

pub mod error;
pub mod fitting;
pub mod kies;
pub mod law;
pub mod mixture;
pub mod numerics;
pub mod sampling;
pub mod saturation;
pub mod special;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::{Error, Result};
pub use kies::{classify_shape, kies_ccdf, kies_cdf, kies_pdf, kies_quantile, KiesParams, ShapeCase, ShapeReport};
pub use law::{DiscreteComponent, MixingLaw, NegMoment};
pub use mixture::{BetaSpec, Endpoint, MixedKies, ModelSpec, ValidityReport};
pub use sampling::{mix_quantile, sample, SampleBatch};
pub use saturation::{
    gamma_of_x, saturation_algorithm1, saturation_exponential_closed, saturation_fixed_point,
    Method, SaturationResult,
};
