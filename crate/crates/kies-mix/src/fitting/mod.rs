//! Histogram calibration pipeline: rescale raw observations into `(0,1)`,
//! bin them, build the empirical density, and fit a mixture family by
//! minimizing the log-corrected absolute-deviation cost
//! `L(γ) = Σ |ln(lᵢ_emp + ε) - ln(lᵢ_th(γ) + ε)|`
//! with multi-start Nelder-Mead over transformed (log/logit/softmax)
//! parameters.

mod nelder_mead;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{DiscreteComponent, MixingLaw};
use crate::mixture::{BetaSpec, MixedKies};
pub use nelder_mead::{minimize, Options as NelderMeadOptions, Outcome as NelderMeadOutcome};

/// Binned observation counts over `m` equal sub-intervals of `(0,1)`.
/// Bin `i` (1-based) covers `[(i-1)/m, i/m)`, the last bin closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub n_total: u64,
    pub centers: Vec<f64>,
}

/// Empirical density values `lᵢ = m Nᵢ / N` at the bin centers.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPdf {
    pub centers: Vec<f64>,
    pub values: Vec<f64>,
}

/// The fit model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// A1: a single Kies distribution.
    Original,
    /// A2: two-component discrete table with per-component β.
    Bimodal,
    /// A3: k-component discrete table with per-component β.
    Multimodal,
    /// A4: affine-transformed shifted-binomial λ.
    Binomial,
    /// A5: affine-transformed geometric λ.
    Geometric,
    /// A6: affine-transformed exponential λ.
    Exponential,
    /// A7: affine-transformed gamma λ.
    Gamma,
    /// A8: affine-transformed beta λ.
    Beta,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Original,
        Family::Bimodal,
        Family::Multimodal,
        Family::Binomial,
        Family::Geometric,
        Family::Exponential,
        Family::Gamma,
        Family::Beta,
    ];

    /// Short label (A1..A8).
    pub fn label(&self) -> &'static str {
        match self {
            Family::Original => "A1",
            Family::Bimodal => "A2",
            Family::Multimodal => "A3",
            Family::Binomial => "A4",
            Family::Geometric => "A5",
            Family::Exponential => "A6",
            Family::Gamma => "A7",
            Family::Beta => "A8",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a1" | "original" | "kies" => Ok(Family::Original),
            "a2" | "bimodal" => Ok(Family::Bimodal),
            "a3" | "multimodal" => Ok(Family::Multimodal),
            "a4" | "binomial" => Ok(Family::Binomial),
            "a5" | "geometric" => Ok(Family::Geometric),
            "a6" | "exponential" => Ok(Family::Exponential),
            "a7" | "gamma" => Ok(Family::Gamma),
            "a8" | "beta" => Ok(Family::Beta),
            other => Err(Error::BadData(format!("unknown family '{other}'"))),
        }
    }
}

/// Fitting configuration.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub family: Family,
    /// Additive constant inside both logarithms of the cost.
    pub epsilon: f64,
    /// Independent optimizer restarts.
    pub restarts: u32,
    /// Simplex iterations per restart.
    pub max_iterations: u32,
    pub seed: u64,
    /// Integer grid searched for the binomial family's n.
    pub integer_n_search: RangeInclusive<u32>,
    /// Component count of the multimodal family.
    pub components: usize,
}

impl FitConfig {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            epsilon: 0.01,
            restarts: 32,
            max_iterations: 600,
            seed: 0,
            integer_n_search: 1..=100,
            components: 3,
        }
    }
}

/// Result of one family fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    /// Family label (A1..A8) for display.
    pub label: String,
    /// Fitted parameters in natural coordinates.
    pub parameters: BTreeMap<String, f64>,
    pub cost: f64,
    pub converged: bool,
    pub evaluations: u64,
}

impl FitResult {
    /// Rebuild the fitted mixture from the reported parameters.
    pub fn model(&self) -> Result<MixedKies> {
        let get = |k: &str| -> Result<f64> {
            self.parameters
                .get(k)
                .copied()
                .ok_or_else(|| Error::BadData(format!("missing parameter '{k}'")))
        };
        match self.family {
            Family::Original => MixedKies::new(
                MixingLaw::Degenerate { lambda: get("lambda")? },
                BetaSpec::Fixed(get("beta")?),
            ),
            Family::Bimodal | Family::Multimodal => {
                let k = self
                    .parameters
                    .keys()
                    .filter(|k| k.starts_with("lambda"))
                    .count();
                let mut components = Vec::with_capacity(k);
                let mut betas = Vec::with_capacity(k);
                for i in 1..=k {
                    components.push(DiscreteComponent {
                        lambda: get(&format!("lambda{i}"))?,
                        weight: get(&format!("p{i}"))?,
                    });
                    betas.push(get(&format!("beta{i}"))?);
                }
                MixedKies::new(
                    MixingLaw::DiscreteTable { components },
                    BetaSpec::PerComponent(betas),
                )
            }
            Family::Binomial => MixedKies::new(
                MixingLaw::Affine {
                    a: get("a")?,
                    b: get("b")?,
                    inner: Box::new(MixingLaw::ShiftedBinomial {
                        n: get("n")? as u32,
                        p: get("p")?,
                    }),
                },
                BetaSpec::Fixed(get("beta")?),
            ),
            Family::Geometric => MixedKies::new(
                MixingLaw::Affine {
                    a: get("a")?,
                    b: get("b")?,
                    inner: Box::new(MixingLaw::Geometric { p: get("p")? }),
                },
                BetaSpec::Fixed(get("beta")?),
            ),
            Family::Exponential => MixedKies::new(
                MixingLaw::Affine {
                    a: get("a")?,
                    b: get("b")?,
                    inner: Box::new(MixingLaw::Exponential { theta: get("theta")? }),
                },
                BetaSpec::Fixed(get("beta")?),
            ),
            Family::Gamma => MixedKies::new(
                MixingLaw::Affine {
                    a: get("a")?,
                    b: get("b")?,
                    inner: Box::new(MixingLaw::Gamma {
                        alpha: get("alpha")?,
                        theta: get("theta")?,
                    }),
                },
                BetaSpec::Fixed(get("beta")?),
            ),
            Family::Beta => MixedKies::new(
                MixingLaw::Affine {
                    a: get("a")?,
                    b: get("b")?,
                    inner: Box::new(MixingLaw::BetaLaw {
                        alpha: get("alpha")?,
                        theta: get("theta")?,
                    }),
                },
                BetaSpec::Fixed(get("beta")?),
            ),
        }
    }
}

/// Min-max rescaling `(x - min) / (1.5 (max - min))` onto `[0, 2/3]`.
pub fn rescale_minmax(data: &[f64]) -> Result<Vec<f64>> {
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() || min == max {
        return Err(Error::BadData(
            "min-max rescaling needs at least two distinct finite values".into(),
        ));
    }
    let span = 1.5 * (max - min);
    Ok(data.iter().map(|x| (x - min) / span).collect())
}

/// Divide all observations by `c`; every result must land strictly inside
/// `(0, 1)`.
pub fn rescale_divide(data: &[f64], c: f64) -> Result<Vec<f64>> {
    if !(c > 0.0) {
        return Err(Error::BadData(format!("divisor must be positive, got {c}")));
    }
    data.iter()
        .map(|x| {
            let v = x / c;
            if v > 0.0 && v < 1.0 {
                Ok(v)
            } else {
                Err(Error::BadData(format!(
                    "observation {x} leaves (0,1) after division by {c}"
                )))
            }
        })
        .collect()
}

/// Bin strictly-interior data into `m` equal sub-intervals and derive the
/// empirical density at the bin centers.
pub fn bin_data(data: &[f64], m: usize) -> Result<(Histogram, EmpiricalPdf)> {
    if m < 2 {
        return Err(Error::BadData(format!("need at least 2 bins, got {m}")));
    }
    if data.is_empty() {
        return Err(Error::BadData("no observations to bin".into()));
    }
    let mut counts = vec![0u64; m];
    for &x in data {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::BadData(format!("observation {x} outside (0,1)")));
        }
        let idx = ((x * m as f64) as usize).min(m - 1);
        counts[idx] += 1;
    }
    let n_total = data.len() as u64;
    let centers: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
    let values: Vec<f64> = counts
        .iter()
        .map(|&c| m as f64 * c as f64 / n_total as f64)
        .collect();
    Ok((
        Histogram { counts, n_total, centers: centers.clone() },
        EmpiricalPdf { centers, values },
    ))
}

/// Log-corrected absolute deviation between the empirical density and the
/// model density at the bin centers.
pub fn cost_function(model: &MixedKies, emp: &EmpiricalPdf, epsilon: f64) -> Result<f64> {
    let mut total = 0.0;
    for (&center, &l_emp) in emp.centers.iter().zip(&emp.values) {
        let l_th = model.pdf(center)?;
        total += ((l_emp + epsilon).ln() - (l_th + epsilon).ln()).abs();
    }
    Ok(total)
}

// Start boxes (natural coordinates) that restarts are drawn from,
// log-uniformly for positive scalars and uniformly in log-odds for
// probabilities.
const BOX_LAMBDA: (f64, f64) = (0.05, 50.0);
const BOX_BETA: (f64, f64) = (0.2, 5.0);
const BOX_SCALE_A: (f64, f64) = (0.1, 100.0);
const BOX_SHIFT_B: (f64, f64) = (1e-4, 50.0);
const BOX_THETA: (f64, f64) = (0.05, 20.0);
const BOX_ALPHA: (f64, f64) = (0.1, 20.0);
const BOX_PROB: (f64, f64) = (0.02, 0.98);

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn safe_exp(z: f64) -> f64 {
    z.clamp(-700.0, 700.0).exp()
}

#[derive(Clone, Copy)]
enum Coord {
    Log((f64, f64)),
    Logit((f64, f64)),
    /// Softmax weight relative to the first component (box in log-weight).
    SoftmaxWeight,
}

fn coords(family: Family, components: usize) -> Vec<Coord> {
    use Coord::*;
    match family {
        Family::Original => vec![Log(BOX_LAMBDA), Log(BOX_BETA)],
        Family::Bimodal | Family::Multimodal => {
            let k = if family == Family::Bimodal { 2 } else { components };
            let mut c = Vec::with_capacity(3 * k - 1);
            c.extend(std::iter::repeat(Log(BOX_LAMBDA)).take(k));
            c.extend(std::iter::repeat(Log(BOX_BETA)).take(k));
            c.extend(std::iter::repeat(SoftmaxWeight).take(k - 1));
            c
        }
        Family::Binomial | Family::Geometric => vec![
            Log(BOX_BETA),
            Log(BOX_SCALE_A),
            Log(BOX_SHIFT_B),
            Logit(BOX_PROB),
        ],
        Family::Exponential => vec![
            Log(BOX_BETA),
            Log(BOX_SCALE_A),
            Log(BOX_SHIFT_B),
            Log(BOX_THETA),
        ],
        Family::Gamma | Family::Beta => vec![
            Log(BOX_BETA),
            Log(BOX_SCALE_A),
            Log(BOX_SHIFT_B),
            Log(BOX_THETA),
            Log(BOX_ALPHA),
        ],
    }
}

fn draw_start<R: Rng>(coords: &[Coord], rng: &mut R) -> Vec<f64> {
    coords
        .iter()
        .map(|c| match c {
            Coord::Log((lo, hi)) => {
                let u: f64 = rng.random();
                lo.ln() + u * (hi.ln() - lo.ln())
            }
            Coord::Logit((lo, hi)) => {
                let u: f64 = rng.random();
                logit(*lo) + u * (logit(*hi) - logit(*lo))
            }
            Coord::SoftmaxWeight => {
                let u: f64 = rng.random();
                -2.0 + 4.0 * u
            }
        })
        .collect()
}

/// Reconstruct the model from transformed coordinates.
fn build_model(family: Family, components: usize, z: &[f64], n: Option<u32>) -> Result<MixedKies> {
    match family {
        Family::Original => MixedKies::new(
            MixingLaw::Degenerate { lambda: safe_exp(z[0]) },
            BetaSpec::Fixed(safe_exp(z[1])),
        ),
        Family::Bimodal | Family::Multimodal => {
            let k = if family == Family::Bimodal { 2 } else { components };
            let lambdas: Vec<f64> = z[..k].iter().map(|&v| safe_exp(v)).collect();
            let betas: Vec<f64> = z[k..2 * k].iter().map(|&v| safe_exp(v)).collect();
            // Softmax with the first weight pinned at log-weight zero.
            let raw: Vec<f64> = std::iter::once(1.0)
                .chain(z[2 * k..3 * k - 1].iter().map(|&v| safe_exp(v)))
                .collect();
            let total: f64 = raw.iter().sum();
            let components: Vec<DiscreteComponent> = lambdas
                .iter()
                .zip(&raw)
                .map(|(&lambda, &w)| DiscreteComponent { lambda, weight: w / total })
                .collect();
            MixedKies::new(
                MixingLaw::DiscreteTable { components },
                BetaSpec::PerComponent(betas),
            )
        }
        Family::Binomial => MixedKies::new(
            MixingLaw::Affine {
                a: safe_exp(z[1]),
                b: safe_exp(z[2]),
                inner: Box::new(MixingLaw::ShiftedBinomial {
                    n: n.expect("binomial fits supply n"),
                    p: sigmoid(z[3]),
                }),
            },
            BetaSpec::Fixed(safe_exp(z[0])),
        ),
        Family::Geometric => MixedKies::new(
            MixingLaw::Affine {
                a: safe_exp(z[1]),
                b: safe_exp(z[2]),
                inner: Box::new(MixingLaw::Geometric { p: sigmoid(z[3]) }),
            },
            BetaSpec::Fixed(safe_exp(z[0])),
        ),
        Family::Exponential => MixedKies::new(
            MixingLaw::Affine {
                a: safe_exp(z[1]),
                b: safe_exp(z[2]),
                inner: Box::new(MixingLaw::Exponential { theta: safe_exp(z[3]) }),
            },
            BetaSpec::Fixed(safe_exp(z[0])),
        ),
        Family::Gamma => MixedKies::new(
            MixingLaw::Affine {
                a: safe_exp(z[1]),
                b: safe_exp(z[2]),
                inner: Box::new(MixingLaw::Gamma {
                    theta: safe_exp(z[3]),
                    alpha: safe_exp(z[4]),
                }),
            },
            BetaSpec::Fixed(safe_exp(z[0])),
        ),
        Family::Beta => MixedKies::new(
            MixingLaw::Affine {
                a: safe_exp(z[1]),
                b: safe_exp(z[2]),
                inner: Box::new(MixingLaw::BetaLaw {
                    theta: safe_exp(z[3]),
                    alpha: safe_exp(z[4]),
                }),
            },
            BetaSpec::Fixed(safe_exp(z[0])),
        ),
    }
}

fn named_parameters(
    family: Family,
    components: usize,
    model: &MixedKies,
    n: Option<u32>,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    match (family, model.law(), model.beta_spec()) {
        (Family::Original, MixingLaw::Degenerate { lambda }, BetaSpec::Fixed(beta)) => {
            out.insert("lambda".into(), *lambda);
            out.insert("beta".into(), *beta);
        }
        (
            Family::Bimodal | Family::Multimodal,
            MixingLaw::DiscreteTable { components: table },
            BetaSpec::PerComponent(betas),
        ) => {
            let _ = components;
            for (i, (c, b)) in table.iter().zip(betas).enumerate() {
                out.insert(format!("lambda{}", i + 1), c.lambda);
                out.insert(format!("beta{}", i + 1), *b);
                out.insert(format!("p{}", i + 1), c.weight);
            }
        }
        (_, MixingLaw::Affine { a, b, inner }, BetaSpec::Fixed(beta)) => {
            out.insert("beta".into(), *beta);
            out.insert("a".into(), *a);
            out.insert("b".into(), *b);
            match &**inner {
                MixingLaw::ShiftedBinomial { p, .. } => {
                    out.insert("p".into(), *p);
                    out.insert("n".into(), f64::from(n.expect("binomial fits supply n")));
                }
                MixingLaw::Geometric { p } => {
                    out.insert("p".into(), *p);
                }
                MixingLaw::Exponential { theta } => {
                    out.insert("theta".into(), *theta);
                }
                MixingLaw::Gamma { alpha, theta } | MixingLaw::BetaLaw { alpha, theta } => {
                    out.insert("alpha".into(), *alpha);
                    out.insert("theta".into(), *theta);
                }
                _ => unreachable!("fit families build known inner laws"),
            }
        }
        _ => unreachable!("fit families build known model shapes"),
    }
    out
}

struct RestartOutcome {
    cost: f64,
    z: Vec<f64>,
    evaluations: u64,
    converged: bool,
}

fn multi_start(
    emp: &EmpiricalPdf,
    config: &FitConfig,
    n: Option<u32>,
    stream_base: u64,
) -> RestartOutcome {
    let coords = coords(config.family, config.components);
    let opts = nelder_mead::Options {
        max_iterations: config.max_iterations as usize,
        ..nelder_mead::Options::default()
    };
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream_base.wrapping_add(r as u64));
            let z0 = draw_start(&coords, &mut rng);
            let objective = |z: &[f64]| -> f64 {
                match build_model(config.family, config.components, z, n) {
                    Ok(model) => cost_function(&model, emp, config.epsilon)
                        .unwrap_or(f64::INFINITY),
                    Err(_) => f64::INFINITY,
                }
            };
            let out = nelder_mead::minimize(objective, &z0, 0.4, &opts);
            RestartOutcome {
                cost: out.f,
                z: out.x,
                evaluations: out.evaluations,
                converged: out.converged,
            }
        })
        .collect();
    let evaluations: u64 = outcomes.iter().map(|o| o.evaluations).sum();
    let best = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.cost
                .partial_cmp(&b.cost)
                .expect("costs are never NaN")
                .then(i.cmp(j))
        })
        .map(|(_, o)| o)
        .expect("at least one restart");
    RestartOutcome { evaluations, ..best }
}

/// Fit one family to an empirical density. The binomial family runs an
/// integer grid search on `n` with a full multi-start per candidate; all
/// other families run a single multi-start. Deterministic for a fixed seed.
pub fn fit(emp: &EmpiricalPdf, config: &FitConfig) -> FitResult {
    let (best, best_n) = if config.family == Family::Binomial {
        let mut best: Option<(RestartOutcome, u32)> = None;
        let mut total_evals = 0_u64;
        for n in config.integer_n_search.clone() {
            let stream_base = (n as u64) << 32;
            let outcome = multi_start(emp, config, Some(n), stream_base);
            total_evals += outcome.evaluations;
            let better = match &best {
                None => true,
                Some((b, _)) => outcome.cost < b.cost,
            };
            if better {
                best = Some((outcome, n));
            }
        }
        let (mut outcome, n) = best.expect("non-empty n grid");
        outcome.evaluations = total_evals;
        (outcome, Some(n))
    } else {
        (multi_start(emp, config, None, 0), None)
    };

    match build_model(config.family, config.components, &best.z, best_n) {
        Ok(model) => {
            // Re-evaluate so the reported cost matches the reported
            // parameters exactly.
            let cost = cost_function(&model, emp, config.epsilon).unwrap_or(f64::INFINITY);
            FitResult {
                family: config.family,
                label: config.family.label().to_string(),
                parameters: named_parameters(config.family, config.components, &model, best_n),
                cost,
                converged: best.converged,
                evaluations: best.evaluations,
            }
        }
        Err(_) => FitResult {
            family: config.family,
            label: config.family.label().to_string(),
            parameters: BTreeMap::new(),
            cost: f64::INFINITY,
            converged: false,
            evaluations: best.evaluations,
        },
    }
}
