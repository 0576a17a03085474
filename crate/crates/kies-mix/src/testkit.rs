//! Shared model builders for the crate's own tests.

use crate::law::{DiscreteComponent, MixingLaw};
use crate::mixture::{BetaSpec, MixedKies};

pub fn table(entries: &[(f64, f64)]) -> MixingLaw {
    MixingLaw::DiscreteTable {
        components: entries
            .iter()
            .map(|&(lambda, weight)| DiscreteComponent { lambda, weight })
            .collect(),
    }
}

pub fn fixed(law: MixingLaw, beta: f64) -> MixedKies {
    MixedKies::new(law, BetaSpec::Fixed(beta)).unwrap()
}

pub fn affine(inner: MixingLaw, a: f64, b: f64) -> MixingLaw {
    MixingLaw::Affine { a, b, inner: Box::new(inner) }
}

/// One representative model per family, including a per-component-β table
/// and an affine wrap.
pub fn representative_models() -> Vec<MixedKies> {
    vec![
        fixed(MixingLaw::Degenerate { lambda: 1.3 }, 1.8),
        fixed(table(&[(0.1, 0.5), (2.0, 0.5)]), 2.0),
        MixedKies::new(
            table(&[(2.0, 0.25), (0.5, 0.75)]),
            BetaSpec::PerComponent(vec![2.0, 1.0]),
        )
        .unwrap(),
        fixed(MixingLaw::ShiftedBinomial { n: 10, p: 0.25 }, 2.0),
        fixed(MixingLaw::Geometric { p: 0.25 }, 2.0),
        fixed(MixingLaw::Exponential { theta: 1.0 }, 2.0),
        fixed(MixingLaw::Gamma { alpha: 2.0, theta: 5.0 }, 0.7),
        fixed(MixingLaw::BetaLaw { alpha: 3.0, theta: 1.0 }, 2.0),
        fixed(affine(MixingLaw::Exponential { theta: 1.0 }, 2.0, 1.0), 2.0),
    ]
}
