//! Band structure of rational-frequency operators.
//!
//! For `α = p/q` every fiber `H_θ` is `q`-periodic, so its spectrum is the set
//! `{E : |Δ(E, θ)| ≤ 2}` with `Δ` the trace of the period transfer matrix. The
//! band edges are the Floquet eigenvalues at Bloch momenta `0` and `π`.

pub mod bandset;
pub mod eigen;
mod halfline;
mod sweep;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

pub use bandset::{BandSet, MERGE_TOL};
pub use eigen::{CyclicJacobi, EigenPath, Tridiagonal};
pub use halfline::{halfline_gap_count, GapCount, GapReport};
pub use sweep::{union_spectrum, union_spectrum_with, SweepOptions};

use crate::contfrac::Fraction;
use crate::dynamics::transfer_product;
use crate::error::{Error, Result};
use crate::model::{sample_coeffs, Alpha, CoefficientFamily, SampledOperator, SINGULAR_THRESHOLD};

/// The `q × q` Floquet matrix of a `q`-periodic fiber.
pub type FloquetMatrix = CyclicJacobi;

pub fn floquet_matrix(family: &CoefficientFamily, frac: Fraction, theta: f64, k: f64) -> FloquetMatrix {
    let op = SampledOperator::new(family, frac, theta);
    let (v, b) = sample_coeffs(&op, 0..frac.q as i64);
    CyclicJacobi::new(v, b, k)
}

/// `Δ(E, θ) = tr A^E_q(θ)`.
pub fn discriminant(family: &CoefficientFamily, frac: Fraction, theta: f64, energy: f64) -> Result<f64> {
    Ok(transfer_product(family, frac, theta, energy, frac.q as usize)?.trace())
}

/// Coefficient `c` in `Δ(E, θ) = F(E) + c cos 2πqθ`, solved from two phases.
///
/// For the almost Mathieu family this is `−2λ^q`; the identity only holds for
/// families whose trace depends on `θ` through `cos 2πqθ`.
pub fn chambers_coefficient(family: &CoefficientFamily, frac: Fraction, energy: f64) -> Result<f64> {
    let q = frac.q as f64;
    let (t1, t2) = (0.13 / q, 0.41 / q);
    let d1 = discriminant(family, frac, t1, energy)?;
    let d2 = discriminant(family, frac, t2, energy)?;
    Ok((d1 - d2) / ((2.0 * PI * q * t1).cos() - (2.0 * PI * q * t2).cos()))
}

/// Spectrum of the single fiber `H_θ`.
pub fn fiber_spectrum(family: &CoefficientFamily, frac: Fraction, theta: f64) -> BandSet {
    fiber_spectrum_with(family, frac, theta, EigenPath::Auto)
}

pub fn fiber_spectrum_with(family: &CoefficientFamily, frac: Fraction, theta: f64, path: EigenPath) -> BandSet {
    let op = SampledOperator::new(family, frac, theta);
    let (v, b) = sample_coeffs(&op, 0..frac.q as i64);
    if b.iter().any(|x| x.abs() <= SINGULAR_THRESHOLD) {
        return BandSet::points(decoupled_eigenvalues(&v, &b), MERGE_TOL);
    }
    let edges = band_edges(&v, &b, path);
    BandSet::new(edges.chunks(2).map(|c| (c[0], c[1])), MERGE_TOL)
}

/// Sorted merge of the Floquet eigenvalues at `k = 0` and `k = π`.
pub(crate) fn band_edges(v: &[f64], b: &[f64], path: EigenPath) -> Vec<f64> {
    let mut edges = CyclicJacobi::new(v.to_vec(), b.to_vec(), 0.0).eigenvalues_with(path);
    edges.extend(CyclicJacobi::new(v.to_vec(), b.to_vec(), PI).eigenvalues_with(path));
    edges.sort_by(f64::total_cmp);
    edges
}

/// Eigenvalues of the open chains left after cutting every vanishing bond of
/// the period.
fn decoupled_eigenvalues(v: &[f64], b: &[f64]) -> Vec<f64> {
    let q = v.len();
    let cut = |n: usize| b[n].abs() <= SINGULAR_THRESHOLD;
    let first = (0..q).find(|&n| cut(n)).expect("at least one vanishing bond");
    let mut out = Vec::with_capacity(q);
    let (mut diag, mut off) = (Vec::new(), Vec::new());
    for step in 1..=q {
        let n = (first + step) % q;
        diag.push(v[n]);
        if cut(n) {
            out.extend(Tridiagonal::new(std::mem::take(&mut diag), std::mem::take(&mut off)).eigenvalues());
        } else {
            off.push(b[n]);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Integrated density of states on an energy grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdsSample {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

impl IdsSample {
    /// Linear interpolation of `N`, clamped outside the grid.
    pub fn at(&self, e: f64) -> f64 {
        let n = self.energies.len();
        if n == 0 {
            return f64::NAN;
        }
        let i = self.energies.partition_point(|x| *x <= e);
        if i == 0 {
            return self.values[0];
        }
        if i == n {
            return self.values[n - 1];
        }
        let (e0, e1) = (self.energies[i - 1], self.energies[i]);
        let t = if e1 > e0 { (e - e0) / (e1 - e0) } else { 1.0 };
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }
}

/// `N(E)` averaged over midpoint phases in `[0, 1/q)` and momenta in `[0, π]`.
pub fn ids(
    family: &CoefficientFamily,
    frac: Fraction,
    grid: &[f64],
    theta_samples: usize,
    k_samples: usize,
) -> Result<IdsSample> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("IDS energy grid must be sorted".into()));
    }
    if theta_samples == 0 || k_samples == 0 {
        return Err(Error::InvalidInput("IDS needs at least one phase and one momentum".into()));
    }
    let q = frac.q as usize;
    let counts = (0..theta_samples * k_samples)
        .into_par_iter()
        .map(|s| {
            let (i, j) = (s / k_samples, s % k_samples);
            let theta = (i as f64 + 0.5) / (q * theta_samples) as f64;
            let k = PI * (j as f64 + 0.5) / k_samples as f64;
            let m = floquet_matrix(family, frac, theta, k);
            grid.iter().map(|&e| m.count_below(e) as u64).collect::<Vec<_>>()
        })
        .reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let denom = (theta_samples * k_samples * q) as f64;
    Ok(IdsSample { energies: grid.to_vec(), values: counts.iter().map(|&c| c as f64 / denom).collect() })
}

/// `n` equally spaced energies covering `[lo, hi]`.
pub fn energy_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ButterflyEntry {
    pub fraction: Fraction,
    pub bands: Option<BandSet>,
    pub error: Option<String>,
}

/// Reduced fractions `p/q` with `1 ≤ p < q ≤ q_max`, ascending by value.
pub fn farey_fractions(q_max: u64) -> Vec<Fraction> {
    let mut out: Vec<Fraction> = (2..=q_max)
        .flat_map(|q| (1..q).map(move |p| (p, q)))
        .filter(|&(p, q)| num_integer::gcd(p, q) == 1)
        .map(|(p, q)| Fraction { p, q })
        .collect();
    out.sort_by(|a, b| (a.p as u128 * b.q as u128).cmp(&(b.p as u128 * a.q as u128)));
    out
}

/// Union spectra for every reduced fraction up to `q_max`. Failures are kept
/// per entry.
pub fn butterfly(family: &CoefficientFamily, q_max: u64, tol: f64) -> Result<Vec<ButterflyEntry>> {
    butterfly_with(family, q_max, tol, &SweepOptions::default())
}

pub fn butterfly_with(
    family: &CoefficientFamily,
    q_max: u64,
    tol: f64,
    opts: &SweepOptions,
) -> Result<Vec<ButterflyEntry>> {
    if q_max < 2 {
        return Err(Error::InvalidInput(format!("butterfly needs q_max >= 2, got {q_max}")));
    }
    Ok(farey_fractions(q_max)
        .into_par_iter()
        .map(|f| match union_spectrum_with(family, f, tol, opts) {
            Ok(bands) => ButterflyEntry { fraction: f, bands: Some(bands), error: None },
            Err(e) => ButterflyEntry { fraction: f, bands: None, error: Some(e.to_string()) },
        })
        .collect())
}

/// Convenience: the frequency as an [`Alpha`].
pub fn rational(frac: Fraction) -> Alpha {
    Alpha::Rational(frac)
}
