//! Isolated eigenvalues of half-line truncations inside spectral gaps.
//!
//! The `N × N` section of a periodic fiber has eigenvalues in the gaps of the
//! full-line spectrum from two sources: states bound to the left end (these
//! are half-line eigenvalues) and states bound to the artificial right end.
//! Eigenvectors tell them apart.

use serde::Serialize;

use super::{fiber_spectrum, Tridiagonal};
use crate::contfrac::Fraction;
use crate::error::{Error, Result};
use crate::model::{sample_coeffs, CoefficientFamily, SampledOperator, SINGULAR_THRESHOLD};

/// Maximum number of half-line eigenvalues allowed in a gap.
pub const MAX_PER_GAP: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCount {
    pub lo: f64,
    pub hi: f64,
    /// Eigenvalues localized at the left end of the section.
    pub left: usize,
    /// Eigenvalues localized at the truncation point.
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub size: usize,
    pub buffer: f64,
    pub gaps: Vec<GapCount>,
    /// Left-localized eigenvalues below and above the whole spectrum.
    pub below: usize,
    pub above: usize,
}

impl GapReport {
    pub fn max_per_gap(&self) -> usize {
        self.gaps.iter().map(|g| g.left).max().unwrap_or(0)
    }

    pub fn within_bound(&self) -> bool {
        self.max_per_gap() <= MAX_PER_GAP
    }
}

fn count_region(t: &Tridiagonal, lo: f64, hi: f64) -> (usize, usize) {
    let half = t.len() / 2;
    let mut left = 0;
    let mut right = 0;
    for e in t.eigenvalues_in(lo, hi) {
        let v = t.eigenvector(e);
        let w: f64 = v[..half].iter().map(|x| x * x).sum();
        if w > 0.5 {
            left += 1;
        } else {
            right += 1;
        }
    }
    (left, right)
}

fn report(family: &CoefficientFamily, frac: Fraction, theta: f64, size: usize) -> GapReport {
    let bands = fiber_spectrum(family, frac, theta);
    let op = SampledOperator::new(family, frac, theta);
    let (v, mut b) = sample_coeffs(&op, 0..size as i64);
    b.pop();
    let t = Tridiagonal::new(v, b);
    let scale = bands.max().unwrap_or(0.0).abs().max(bands.min().unwrap_or(0.0).abs()).max(1.0);
    let buffer = 1e-9 * scale;
    let gaps = bands
        .gaps()
        .into_iter()
        .map(|(lo, hi)| {
            let (left, right) = count_region(&t, lo + buffer, hi - buffer);
            GapCount { lo, hi, left, right }
        })
        .collect();
    let (tlo, thi) = t.bounds();
    let below = match bands.min() {
        Some(m) => count_region(&t, tlo - 1.0, m - buffer).0,
        None => 0,
    };
    let above = match bands.max() {
        Some(m) => count_region(&t, m + buffer, thi + 1.0).0,
        None => 0,
    };
    GapReport { size, buffer, gaps, below, above }
}

/// Per-gap counts of isolated eigenvalues of the `n_trunc`-site section.
///
/// If some gap holds more than two left-localized eigenvalues, the count is
/// repeated at `2 n_trunc`; a violation at both sizes is reported as
/// inconclusive.
pub fn halfline_gap_count(
    family: &CoefficientFamily,
    frac: Fraction,
    theta: f64,
    n_trunc: usize,
) -> Result<GapReport> {
    let q = frac.q as usize;
    if n_trunc < 4 * q {
        return Err(Error::InvalidInput(format!("truncation {n_trunc} is too short for period {q}")));
    }
    let op = SampledOperator::new(family, frac, theta);
    for n in 0..q as i64 {
        let b = op.b(n);
        if b.abs() <= SINGULAR_THRESHOLD {
            return Err(Error::SingularPhase { step: n, theta: op.theta, value: b.abs() });
        }
    }
    let first = report(family, frac, theta, n_trunc);
    if first.within_bound() {
        return Ok(first);
    }
    let second = report(family, frac, theta, 2 * n_trunc);
    if second.within_bound() {
        return Ok(second);
    }
    Err(Error::Inconclusive(format!(
        "{} and {} isolated eigenvalues in one gap at sizes {} and {}",
        first.max_per_gap(),
        second.max_per_gap(),
        n_trunc,
        2 * n_trunc
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_family, CustomFamily, FamilyKind, TrigPoly};

    #[test]
    fn free_laplacian_has_no_gaps() {
        let free = make_family(FamilyKind::Custom(CustomFamily {
            name: "free".into(),
            v: TrigPoly::constant(0.0),
            b: TrigPoly::constant(1.0),
            v_deriv_max: 0.0,
            b_deriv_max: 0.0,
            b_zeros: vec![],
        }))
        .unwrap();
        for q in [2, 3, 5] {
            let r = halfline_gap_count(&free, Fraction::new(1, q).unwrap(), 0.3, 200).unwrap();
            assert!(r.gaps.is_empty());
        }
    }

    #[test]
    fn period_two_gap() {
        let f = make_family(FamilyKind::Amo { lambda: 1.0 }).unwrap();
        let r = halfline_gap_count(&f, Fraction::new(1, 2).unwrap(), 0.1, 400).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert!(r.within_bound());
    }
}
