//! The base Kies distribution on `(0,1)`.
//!
//! This is the Weibull distribution pushed through `t = y/(y+1)`, giving
//! CDF `1 - exp(-λ(t/(1-t))^β)` on a finite domain. Besides the usual
//! evaluation functions the module classifies the density's shape (number
//! and location of interior modes) from the sign structure of an auxiliary
//! function `α(t)`.

use crate::error::{Error, Result};
use crate::numerics::{bisect, grid_roots};

/// Parameters `(λ, β)` of a single Kies distribution; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KiesParams {
    lambda: f64,
    beta: f64,
}

impl KiesParams {
    pub fn new(lambda: f64, beta: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        Ok(Self { lambda, beta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `λ (t/(1-t))^β` evaluated as `exp(ln λ + β(ln t - ln(1-t)))`.
///
/// The direct power form overflows long before the exponential of its
/// logarithm does; once even the log form exceeds the exponent range the
/// result saturates to `+inf`, which downstream code maps to the exact
/// endpoint values (CDF 1, CCDF/PDF 0).
pub(crate) fn hazard(lambda: f64, beta: f64, t: f64) -> f64 {
    (lambda.ln() + beta * (t.ln() - (1.0 - t).ln())).exp()
}

fn check_unit_interval(t: f64, closed: bool) -> Result<()> {
    let inside = if closed {
        (0.0..=1.0).contains(&t)
    } else {
        t > 0.0 && t < 1.0
    };
    if inside {
        Ok(())
    } else {
        Err(Error::Domain(format!("t = {t} outside the distribution domain")))
    }
}

/// CDF `1 - exp(-λ(t/(1-t))^β)` for `t ∈ [0, 1]`, with the limit convention
/// 0 at `t = 0` and 1 at `t = 1`.
pub fn kies_cdf(p: &KiesParams, t: f64) -> Result<f64> {
    check_unit_interval(t, true)?;
    Ok(-(-hazard(p.lambda, p.beta, t)).exp_m1())
}

/// CCDF `exp(-λ(t/(1-t))^β)`, computed from the exponential form directly
/// so that values near `t → 1` keep full relative accuracy.
pub fn kies_ccdf(p: &KiesParams, t: f64) -> Result<f64> {
    check_unit_interval(t, true)?;
    Ok((-hazard(p.lambda, p.beta, t)).exp())
}

pub(crate) fn kies_pdf_raw(lambda: f64, beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        // Enumerated left-endpoint limits; the formula itself is 0/0 here.
        return if beta > 1.0 {
            0.0
        } else if beta == 1.0 {
            lambda
        } else {
            f64::INFINITY
        };
    }
    if t == 1.0 {
        return 0.0;
    }
    let s = hazard(lambda, beta, t);
    // ln pdf = ln(λβ) + (β-1)ln t - (β+1)ln(1-t) - s; s = +inf gives 0.
    ((lambda * beta).ln() + (beta - 1.0) * t.ln() - (beta + 1.0) * (1.0 - t).ln() - s).exp()
}

/// Density `λβ t^{β-1} (1-t)^{-β-1} exp(-λ(t/(1-t))^β)`.
///
/// Endpoint queries return the distribution's limit values instead of
/// evaluating the (indeterminate) formula: at `t = 0` the limit is 0 for
/// `β > 1`, `λ` for `β = 1` and `+inf` for `β < 1`; at `t = 1` it is 0.
pub fn kies_pdf(p: &KiesParams, t: f64) -> Result<f64> {
    check_unit_interval(t, true)?;
    Ok(kies_pdf_raw(p.lambda, p.beta, t))
}

pub(crate) fn kies_quantile_raw(lambda: f64, beta: f64, u: f64) -> f64 {
    let y = (-(-u).ln_1p() / lambda).powf(1.0 / beta);
    y / (1.0 + y)
}

/// Quantile `t = y/(1+y)` with `y = (-ln(1-u)/λ)^{1/β}` for `u ∈ (0, 1)`.
pub fn kies_quantile(p: &KiesParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("quantile level u = {u} outside (0,1)")));
    }
    Ok(kies_quantile_raw(p.lambda, p.beta, u))
}

/// Sign driver of the density's monotonicity: the PDF increases exactly
/// where `α(t) = λβ(t/(1-t))^β - (2t + β - 1)` is negative.
fn alpha(p: &KiesParams, t: f64) -> f64 {
    p.lambda * p.beta * ((t / (1.0 - t)).ln() * p.beta).exp() - (2.0 * t + p.beta - 1.0)
}

/// Derivative of `α`: `λβ² t^{β-1} (1-t)^{-β-1} - 2`.
fn alpha_prime(p: &KiesParams, t: f64) -> f64 {
    p.lambda * p.beta * p.beta * ((p.beta - 1.0) * t.ln() - (p.beta + 1.0) * (1.0 - t).ln()).exp()
        - 2.0
}

/// Shape classes of the Kies density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeCase {
    /// `β > 1`: starts at zero, single interior maximum.
    BetaAbove1,
    /// `β = 1`, `λ >= 2`: decreasing from `λ` to zero.
    BetaEq1Decreasing,
    /// `β = 1`, `λ < 2`: starts at `λ`, peaks at `1 - λ/2`.
    BetaEq1Peaked,
    /// `β < 1`, monotone: decreasing from infinity to zero.
    BetaBelow1Decreasing,
    /// `β < 1` with an interior local minimum followed by a local maximum.
    BetaBelow1Bimodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Monotonicity report for the density of one parameter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub case: ShapeCase,
    /// Density value at `t → 0`: 0, λ, or `+inf`.
    pub left_value: f64,
    /// Interior critical points, strictly increasing.
    pub critical_points: Vec<f64>,
    /// Maximal open intervals of constant monotonicity, in order.
    pub monotone_segments: Vec<(f64, f64, Direction)>,
}

const SHAPE_GRID_STEPS: usize = 10_000; // 1e-4 spacing on (0,1)
const ROOT_TOL: f64 = 1e-12;

fn segments_from_critical(points: &[f64], first: Direction) -> Vec<(f64, f64, Direction)> {
    let mut segs = Vec::with_capacity(points.len() + 1);
    let mut lo = 0.0;
    let mut dir = first;
    for &p in points {
        segs.push((lo, p, dir));
        lo = p;
        dir = match dir {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
        };
    }
    segs.push((lo, 1.0, dir));
    segs
}

/// Classify the density shape per the case analysis on `β` and the roots
/// of `α` and `α'`. Roots are bracketed by a sign scan on a `1e-4` grid and
/// refined by bisection to `1e-12`.
pub fn classify_shape(p: &KiesParams) -> ShapeReport {
    let beta = p.beta;
    if beta > 1.0 {
        // α(0+) = 1 - β < 0, α(1-) = +inf: unique root t2, rise then fall.
        let t2 = single_root_of_alpha(p, 0.0, 1.0);
        return ShapeReport {
            case: ShapeCase::BetaAbove1,
            left_value: 0.0,
            critical_points: vec![t2],
            monotone_segments: segments_from_critical(&[t2], Direction::Increasing),
        };
    }
    if beta == 1.0 {
        if p.lambda >= 2.0 {
            return ShapeReport {
                case: ShapeCase::BetaEq1Decreasing,
                left_value: p.lambda,
                critical_points: vec![],
                monotone_segments: segments_from_critical(&[], Direction::Decreasing),
            };
        }
        let t2 = 1.0 - p.lambda / 2.0;
        return ShapeReport {
            case: ShapeCase::BetaEq1Peaked,
            left_value: p.lambda,
            critical_points: vec![t2],
            monotone_segments: segments_from_critical(&[t2], Direction::Increasing),
        };
    }

    // β < 1: the density starts at infinity. Whether it dips and peaks is
    // decided by α' at t̄ = (1-β)/2 and by the sign of α at the larger root
    // of α'.
    let decreasing = ShapeReport {
        case: ShapeCase::BetaBelow1Decreasing,
        left_value: f64::INFINITY,
        critical_points: vec![],
        monotone_segments: segments_from_critical(&[], Direction::Decreasing),
    };
    let t_bar = (1.0 - beta) / 2.0;
    if alpha_prime(p, t_bar) >= 0.0 {
        return decreasing;
    }
    // α'(t̄) < 0 while α' → +inf at both ends, so the larger root t̄2 lies
    // in (t̄, 1) and a sign scan there cannot miss it.
    let t_bar2 = single_root_of_alpha_prime(p, t_bar, 1.0);
    if alpha(p, t_bar2) >= 0.0 {
        return decreasing;
    }
    // Two roots of α bracket the rising stretch: t1 in (0, t̄2), t2 above.
    let t1 = first_alpha_root_below(p, t_bar2);
    let t2 = single_root_of_alpha(p, t_bar2, 1.0);
    ShapeReport {
        case: ShapeCase::BetaBelow1Bimodal,
        left_value: f64::INFINITY,
        critical_points: vec![t1, t2],
        monotone_segments: segments_from_critical(&[t1, t2], Direction::Decreasing),
    }
}

fn single_root_of_alpha(p: &KiesParams, lo: f64, hi: f64) -> f64 {
    let roots = grid_roots(|t| alpha(p, t), lo, hi, SHAPE_GRID_STEPS, ROOT_TOL);
    debug_assert_eq!(roots.len(), 1, "expected one root of alpha in ({lo},{hi})");
    roots[0]
}

fn single_root_of_alpha_prime(p: &KiesParams, lo: f64, hi: f64) -> f64 {
    let roots = grid_roots(|t| alpha_prime(p, t), lo, hi, SHAPE_GRID_STEPS, ROOT_TOL);
    debug_assert_eq!(roots.len(), 1, "expected one root of alpha' in ({lo},{hi})");
    roots[0]
}

/// Smallest root of α in `(0, hi)`. α(0+) = 1 - β > 0 and α(hi) < 0, but the
/// root can sit below any uniform grid spacing, so the bracket is located by
/// geometric descent from `hi` instead of a linear scan.
fn first_alpha_root_below(p: &KiesParams, hi: f64) -> f64 {
    let mut lo = hi / 2.0;
    while alpha(p, lo) < 0.0 && lo > f64::MIN_POSITIVE {
        lo /= 2.0;
    }
    bisect(|t| alpha(p, t), lo, hi, ROOT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, beta: f64) -> KiesParams {
        KiesParams::new(lambda, beta).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(KiesParams::new(0.0, 1.0).is_err());
        assert!(KiesParams::new(1.0, -2.0).is_err());
        assert!(KiesParams::new(f64::NAN, 1.0).is_err());
        assert!(KiesParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_endpoints_and_reference_value() {
        let p = params(1.0, 1.0);
        assert_eq!(kies_cdf(&p, 0.0).unwrap(), 0.0);
        assert_eq!(kies_cdf(&p, 1.0).unwrap(), 1.0);
        // 1 - e^{-1}, 30-digit reference
        assert!((kies_cdf(&p, 0.5).unwrap() - 0.6321205588285576784).abs() < 1e-15);
        assert!(kies_cdf(&p, -0.1).is_err());
        assert!(kies_cdf(&p, 1.5).is_err());
    }

    #[test]
    fn ccdf_endpoints_and_reference_value() {
        assert_eq!(kies_ccdf(&params(2.0, 2.0), 0.0).unwrap(), 1.0);
        assert_eq!(kies_ccdf(&params(0.1, 2.0), 1.0).unwrap(), 0.0);
        let v = kies_ccdf(&params(1.0, 1.0), 0.5).unwrap();
        assert!((v - 0.3678794411714423216).abs() < 1e-15);
    }

    #[test]
    fn ccdf_complements_cdf() {
        let p = params(0.7, 2.3);
        for k in 1..40 {
            let t = k as f64 / 40.0;
            let sum = kies_cdf(&p, t).unwrap() + kies_ccdf(&p, t).unwrap();
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ccdf_stays_accurate_near_one() {
        // Deep in the right tail the CDF rounds to 1, so 1 - CDF would be 0;
        // the direct exponential form keeps full relative accuracy.
        let p = params(1.0, 2.0);
        let t = 0.87_f64;
        let s = (t / (1.0 - t)).powi(2);
        let want = (-s).exp(); // ~ 3.6e-20
        let got = kies_ccdf(&p, t).unwrap();
        assert!(got > 0.0);
        assert!(((got - want) / want).abs() < 1e-9);
        assert_eq!(1.0 - kies_cdf(&p, t).unwrap(), 0.0);
    }

    #[test]
    fn pdf_left_endpoint_conventions() {
        assert_eq!(kies_pdf(&params(3.0, 1.0), 0.0).unwrap(), 3.0);
        assert_eq!(kies_pdf(&params(1.0, 2.0), 0.0).unwrap(), 0.0);
        assert_eq!(kies_pdf(&params(1.0, 0.5), 0.0).unwrap(), f64::INFINITY);
        assert_eq!(kies_pdf(&params(5.0, 0.5), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn pdf_reference_value() {
        // 4 e^{-1}, 30-digit reference
        let v = kies_pdf(&params(1.0, 1.0), 0.5).unwrap();
        assert!((v - 1.4715177646857692864).abs() < 1e-14);
    }

    #[test]
    fn pdf_no_overflow_for_extreme_parameters() {
        let p = params(1e6, 80.0);
        for &t in &[1e-12, 0.5, 0.999, 1.0 - 1e-12] {
            let v = kies_pdf(&p, t).unwrap();
            assert!(v.is_finite() && v >= 0.0, "pdf({t}) = {v}");
        }
        assert_eq!(kies_cdf(&p, 1.0 - 1e-12).unwrap(), 1.0);
        assert_eq!(kies_ccdf(&p, 1.0 - 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = params(1.0, 1.0);
        let u = 0.6321205588285576784; // 1 - e^{-1}
        assert!((kies_quantile(&p, u).unwrap() - 0.5).abs() < 1e-14);

        let p = params(2.0, 2.0);
        let t = kies_quantile(&p, 0.5).unwrap();
        assert!((kies_cdf(&p, t).unwrap() - 0.5).abs() < 1e-12);

        assert!(kies_quantile(&p, 0.0).is_err());
        assert!(kies_quantile(&p, 1.0).is_err());
    }

    #[test]
    fn quantile_roundtrip_grid() {
        let p = params(0.35, 1.7);
        for k in 1..100 {
            let u = k as f64 / 100.0;
            let t = kies_quantile(&p, u).unwrap();
            assert!((kies_cdf(&p, t).unwrap() - u).abs() < 1e-10, "u={u}");
        }
    }

    #[test]
    fn quantile_limits() {
        let p = params(1.3, 0.8);
        assert!(kies_quantile(&p, 1e-300).unwrap() < 1e-100);
        assert!(kies_quantile(&p, 1.0 - 1e-14).unwrap() > 0.9);
    }

    #[test]
    fn shape_beta_above_one() {
        let report = classify_shape(&params(0.1, 2.0));
        assert_eq!(report.case, ShapeCase::BetaAbove1);
        assert_eq!(report.left_value, 0.0);
        assert_eq!(report.critical_points.len(), 1);
        // 30-digit root of alpha for (0.1, 2)
        assert!((report.critical_points[0] - 0.78166077164713974).abs() < 1e-10);
    }

    #[test]
    fn shape_beta_one_cases() {
        let report = classify_shape(&params(2.0, 1.0));
        assert_eq!(report.case, ShapeCase::BetaEq1Decreasing);
        assert_eq!(report.left_value, 2.0);
        assert!(report.critical_points.is_empty());

        let report = classify_shape(&params(1.0, 1.0));
        assert_eq!(report.case, ShapeCase::BetaEq1Peaked);
        assert_eq!(report.left_value, 1.0);
        assert!((report.critical_points[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn shape_beta_below_one_cases() {
        // α'(t̄) > 0: monotone decreasing.
        let report = classify_shape(&params(5.0, 0.5));
        assert_eq!(report.case, ShapeCase::BetaBelow1Decreasing);
        assert_eq!(report.left_value, f64::INFINITY);

        // α'(t̄) < 0 but α(t̄2) > 0: still decreasing.
        let report = classify_shape(&params(1.5, 0.5));
        assert_eq!(report.case, ShapeCase::BetaBelow1Decreasing);

        // Full bimodal structure (roots near 0.0575 and 0.9265).
        let report = classify_shape(&params(0.2, 0.9));
        assert_eq!(report.case, ShapeCase::BetaBelow1Bimodal);
        assert_eq!(report.critical_points.len(), 2);
        assert!(report.critical_points[0] < report.critical_points[1]);
        assert!((report.critical_points[0] - 0.0575).abs() < 5e-3);
        assert!((report.critical_points[1] - 0.9265).abs() < 5e-3);
    }

    #[test]
    fn shape_segments_match_numerical_derivative_sign() {
        for &(lambda, beta) in &[
            (0.1, 2.0),
            (3.0, 4.5),
            (1.0, 1.0),
            (2.5, 1.0),
            (5.0, 0.5),
            (1.5, 0.5),
            (0.2, 0.9),
            (0.05, 0.9),
        ] {
            let p = params(lambda, beta);
            let report = classify_shape(&p);
            let h = 1e-7;
            for k in 1..1000 {
                let t = k as f64 * 1e-3;
                // Stay away from critical points where the sign flips.
                if report
                    .critical_points
                    .iter()
                    .any(|c| (t - c).abs() < 1e-2)
                {
                    continue;
                }
                let up = kies_pdf(&p, t + h).unwrap();
                let down = kies_pdf(&p, t - h).unwrap();
                if up < 1e-300 && down < 1e-300 {
                    continue; // density has underflowed; no sign information
                }
                let deriv = up - down;
                let segment = report
                    .monotone_segments
                    .iter()
                    .find(|(lo, hi, _)| t > *lo && t < *hi)
                    .unwrap_or_else(|| panic!("t={t} not covered for ({lambda},{beta})"));
                match segment.2 {
                    Direction::Increasing => {
                        assert!(deriv > 0.0, "({lambda},{beta}) t={t}: expected increasing")
                    }
                    Direction::Decreasing => {
                        assert!(deriv < 0.0, "({lambda},{beta}) t={t}: expected decreasing")
                    }
                }
            }
        }
    }

    #[test]
    fn shape_critical_points_inside_domain_and_sorted() {
        for &(lambda, beta) in &[(0.1, 2.0), (1.0, 1.0), (0.2, 0.9), (7.0, 3.0)] {
            let report = classify_shape(&params(lambda, beta));
            for w in report.critical_points.windows(2) {
                assert!(w[0] < w[1]);
            }
            for &c in &report.critical_points {
                assert!(c > 0.0 && c < 1.0);
            }
        }
    }
}
