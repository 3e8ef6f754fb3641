//! Benchmark fixtures shared by the criterion targets.

use harperlab_core::contfrac::{convergents_up_to, CfExpansion};
use harperlab_core::model::{make_family, FamilyKind};
use harperlab_core::{CoefficientFamily, Fraction};

pub fn amo() -> CoefficientFamily {
    make_family(FamilyKind::Amo { lambda: 1.0 }).expect("valid family")
}

pub fn chiral() -> CoefficientFamily {
    make_family(FamilyKind::ChiralAmo).expect("valid family")
}

/// Golden-mean approximants with denominator at most `q_max`.
pub fn golden_fractions(q_max: u64) -> Vec<Fraction> {
    convergents_up_to(&CfExpansion::Golden, q_max)
        .expect("golden mean expands indefinitely")
        .iter()
        .filter_map(|c| c.fraction())
        .filter(|f| f.q >= 2)
        .collect()
}
