//! Band covers, Hausdorff sums, dimension estimates and scaling tables.

use rayon::prelude::*;
use serde::Serialize;

use crate::contfrac::{convergents, CfExpansion, Fraction};
use crate::error::{Error, Result};
use crate::model::{make_family, CoefficientFamily, FamilyKind};
use crate::spectral::{union_spectrum_with, BandSet, SweepOptions};
use crate::{thouless_constant, LAST_BOUND};

/// `t` values at which covers report `Σ|w_m|^t`.
pub const DEFAULT_T_GRID: [f64; 11] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0];

/// Inflated bands `w_m` of one approximant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub q: u64,
    pub c: f64,
    pub delta: f64,
    pub intervals: Vec<[f64; 2]>,
    pub total_length: f64,
    /// `(t, Σ|w_m|^t)`.
    pub t_sums: Vec<(f64, f64)>,
}

impl CoverReport {
    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.intervals.iter().map(|w| w[1] - w[0])
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn as_bandset(&self) -> BandSet {
        BandSet::new(self.intervals.iter().map(|w| (w[0], w[1])), 0.0)
    }

    pub fn sum_at(&self, t: f64) -> f64 {
        self.lengths().map(|l| l.powf(t)).sum()
    }
}

/// `δ = C ln q / q²`.
pub fn cover_delta(q: u64, c: f64) -> f64 {
    let qf = q as f64;
    c * qf.ln() / (qf * qf)
}

/// Widens every band by `δ = C ln q / q²` on each side and merges overlaps.
pub fn inflate_cover(bands: &BandSet, q: u64, c: f64) -> Result<CoverReport> {
    if q < 2 || !(c > 0.0) {
        return Err(Error::InvalidInput(format!("cover needs q >= 2 and C > 0 (q = {q}, C = {c})")));
    }
    let delta = cover_delta(q, c);
    let merged = BandSet::new(bands.intervals().iter().map(|b| (b[0] - delta, b[1] + delta)), 0.0);
    let intervals = merged.intervals().to_vec();
    let total_length = merged.measure();
    let bookkeeping = bands.measure() + 2.0 * delta * bands.len() as f64;
    assert!(total_length <= bookkeeping * (1.0 + 1e-12) + 1e-15, "cover longer than bands plus inflation");
    let mut cover = CoverReport { q, c, delta, intervals, total_length, t_sums: Vec::new() };
    cover.t_sums = DEFAULT_T_GRID.iter().map(|&t| (t, cover.sum_at(t))).collect();
    Ok(cover)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderSum {
    pub t: f64,
    pub sum: f64,
    /// `N^{1−t} (Σ|w_m|)^t` with `N = max(q, count)`.
    pub bound: f64,
}

impl HolderSum {
    pub fn holds(&self) -> bool {
        self.sum <= self.bound * (1.0 + 1e-12)
    }
}

/// `Σ|w_m|^t` together with its Hölder bound.
pub fn hausdorff_sum(cover: &CoverReport, t: f64) -> Result<HolderSum> {
    holder_sum(cover.lengths(), cover.q, t)
}

pub fn holder_sum(lengths: impl Iterator<Item = f64>, q: u64, t: f64) -> Result<HolderSum> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidInput(format!("t must lie in (0, 1], got {t}")));
    }
    let (mut sum, mut total, mut count) = (0.0, 0.0, 0usize);
    for l in lengths {
        sum += l.powf(t);
        total += l;
        count += 1;
    }
    let n = (q as f64).max(count as f64);
    Ok(HolderSum { t, sum, bound: n.powf(1.0 - t) * f64::powf(total, t) })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub covers: Vec<CoverReport>,
    pub t_grid: Vec<f64>,
    /// Smallest grid `t` whose sums decrease over the last three covers.
    pub t_star: Option<f64>,
    /// Slope of `ln N(δ)` against `ln(1/δ)`.
    pub box_slope: f64,
    /// `(ln(1/δ), ln N(δ))` per cover.
    pub box_points: Vec<(f64, f64)>,
}

impl DimensionEstimate {
    pub fn sums_at(&self, t: f64) -> Vec<f64> {
        self.covers.iter().map(|c| c.sum_at(t)).collect()
    }
}

/// `t*` and box-counting slope from the covers of the given approximants.
pub fn dim_upper_estimate(
    family: &CoefficientFamily,
    fractions: &[Fraction],
    t_grid: &[f64],
    c: f64,
    tol: f64,
) -> Result<DimensionEstimate> {
    if fractions.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: fractions.len() });
    }
    if fractions.windows(2).any(|w| w[0].q >= w[1].q) {
        return Err(Error::InvalidInput("approximants must have increasing denominators".into()));
    }
    let opts = SweepOptions { certify: false, ..Default::default() };
    let covers = fractions
        .par_iter()
        .map(|f| inflate_cover(&union_spectrum_with(family, *f, tol, &opts)?, f.q, c))
        .collect::<Result<Vec<_>>>()?;
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let last = &covers[covers.len() - 3..];
    let t_star = grid.iter().copied().find(|&t| {
        let s: Vec<f64> = last.iter().map(|cv| cv.sum_at(t)).collect();
        s[0] > s[1] && s[1] > s[2]
    });
    let box_points: Vec<(f64, f64)> = covers
        .iter()
        .map(|cv| {
            let boxes: f64 = cv.lengths().map(|l| (l / cv.delta).ceil()).sum();
            ((1.0 / cv.delta).ln(), boxes.ln())
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = box_points.iter().copied().unzip();
    let (box_slope, _) = least_squares(&xs, &ys);
    Ok(DimensionEstimate { covers, t_grid: grid, t_star, box_slope, box_points })
}

/// Convergents `p_n/q_n`, `n = 1..=n_max`, as `(n, fraction)`.
pub fn convergent_fractions(cf: &CfExpansion, n_max: usize) -> Result<Vec<(usize, Fraction)>> {
    Ok(convergents(cf, n_max)?
        .iter()
        .filter_map(|c| c.fraction().map(|f| (c.n, f)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub p: u64,
    pub q: u64,
    pub measure: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub reference: f64,
    pub last_bound: f64,
}

impl ScalingTable {
    pub fn row(&self, q: u64) -> Option<&ScalingRow> {
        self.rows.iter().find(|r| r.q == q)
    }
}

/// `q |σ(M_{p/q})|` for the critical almost Mathieu operator along the
/// convergents of `alpha`. A row at or above `8e` is an error.
pub fn thouless_scaling_table(alpha: &CfExpansion, n_max: usize, tol: f64) -> Result<ScalingTable> {
    if n_max < 2 {
        return Err(Error::InvalidInput(format!("scaling table needs n_max >= 2, got {n_max}")));
    }
    let amo = make_family(FamilyKind::Amo { lambda: 1.0 })?;
    let opts = SweepOptions::default();
    let mut rows = convergent_fractions(alpha, n_max)?
        .into_par_iter()
        .map(|(n, f)| {
            let measure = union_spectrum_with(&amo, f, tol, &opts)?.measure();
            Ok(ScalingRow { n, p: f.p, q: f.q, measure, scaled: f.q as f64 * measure })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.q, r.n));
    if let Some(r) = rows.iter().find(|r| r.scaled >= LAST_BOUND) {
        return Err(Error::LastBoundViolated { q: r.q, value: r.scaled });
    }
    Ok(ScalingTable { rows, reference: thouless_constant(), last_bound: LAST_BOUND })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub n: usize,
    pub coarse: Fraction,
    pub fine: Fraction,
    pub delta_alpha: f64,
    /// `sup_{E ∈ σ(fine)} dist(E, σ(coarse))`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityFit {
    pub rows: Vec<ContinuityRow>,
    /// Fitted exponent in `d ≈ K |Δα|^γ`.
    pub gamma: f64,
    pub k: f64,
    /// Exponent of the classical Hölder-1/2 modulus, for comparison.
    pub holder_baseline: f64,
}

/// Fits the modulus of continuity of `α ↦ σ(M_α)` along consecutive
/// convergents `n ∈ n_range`.
pub fn continuity_fit(
    family: &CoefficientFamily,
    alpha: &CfExpansion,
    n_range: std::ops::RangeInclusive<usize>,
    tol: f64,
) -> Result<ContinuityFit> {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    let count = (hi + 1).saturating_sub(lo);
    if count < 4 {
        return Err(Error::InsufficientData { needed: 4, got: count });
    }
    let fracs: Vec<(usize, Fraction)> =
        convergent_fractions(alpha, hi)?.into_iter().filter(|(n, _)| (lo..=hi).contains(n)).collect();
    let opts = SweepOptions { certify: false, ..Default::default() };
    let spectra = fracs
        .par_iter()
        .map(|(_, f)| union_spectrum_with(family, *f, tol, &opts))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ContinuityRow> = (0..fracs.len() - 1)
        .map(|i| {
            let (coarse, fine) = (fracs[i].1, fracs[i + 1].1);
            ContinuityRow {
                n: fracs[i].0,
                coarse,
                fine,
                delta_alpha: (coarse.value() - fine.value()).abs(),
                deviation: spectra[i + 1].deviation_from(&spectra[i]),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.deviation > 0.0 && r.delta_alpha > 0.0)
        .map(|r| (r.delta_alpha.ln(), r.deviation.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: xs.len() });
    }
    let (gamma, ln_k) = least_squares(&xs, &ys);
    Ok(ContinuityFit { rows, gamma, k: ln_k.exp(), holder_baseline: 0.5 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AubryAndreRow {
    pub q: u64,
    pub measure: f64,
    /// `|measure − 4|1−λ|| / (4|1−λ|)`.
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AubryAndreTable {
    pub lambda: f64,
    pub target: f64,
    /// Relative deviations at or below `tol / target` are not resolved.
    pub resolution: f64,
    pub rows: Vec<AubryAndreRow>,
}

impl AubryAndreTable {
    /// Strictly decreasing until the deviation drops below the resolution;
    /// unresolved rows count as ties.
    pub fn decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].relative_deviation < w[0].relative_deviation
                || w[0].relative_deviation.max(w[1].relative_deviation) <= self.resolution
        })
    }

    pub fn final_deviation(&self) -> Option<f64> {
        self.rows.last().map(|r| r.relative_deviation)
    }
}

/// Measures of `σ(M_{p/q})` for `amo(λ)` against `4|1−λ|`.
pub fn aubry_andre_check(lambda: f64, alpha: &CfExpansion, n_max: usize, tol: f64) -> Result<AubryAndreTable> {
    if !(lambda > 0.0) || lambda == 1.0 {
        return Err(Error::InvalidInput(format!("need lambda > 0 and lambda != 1, got {lambda}")));
    }
    let family = make_family(FamilyKind::Amo { lambda })?;
    let target = 4.0 * (1.0 - lambda).abs();
    let mut fracs: Vec<Fraction> =
        convergent_fractions(alpha, n_max)?.into_iter().map(|(_, f)| f).filter(|f| f.q >= 2).collect();
    fracs.dedup_by_key(|f| f.q);
    let opts = SweepOptions::default();
    let rows = fracs
        .par_iter()
        .map(|f| {
            let measure = union_spectrum_with(&family, *f, tol, &opts)?.measure();
            Ok(AubryAndreRow { q: f.q, measure, relative_deviation: (measure - target).abs() / target })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AubryAndreTable { lambda, target, resolution: tol / target, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverCheck {
    pub coarse: Fraction,
    pub fine: Fraction,
    /// Largest distance from the finer spectrum to the coarse cover.
    pub excess: f64,
}

impl CoverCheck {
    pub fn valid(&self) -> bool {
        self.excess == 0.0
    }
}

/// Whether each finer approximant's spectrum lies inside the cover built from
/// the previous one.
pub fn cover_validity(family: &CoefficientFamily, fractions: &[Fraction], c: f64, tol: f64) -> Result<Vec<CoverCheck>> {
    let opts = SweepOptions { certify: false, ..Default::default() };
    let spectra = fractions
        .par_iter()
        .map(|f| union_spectrum_with(family, *f, tol, &opts))
        .collect::<Result<Vec<_>>>()?;
    (0..fractions.len().saturating_sub(1))
        .map(|i| {
            let cover = inflate_cover(&spectra[i], fractions[i].q, c)?.as_bandset();
            Ok(CoverCheck { coarse: fractions[i], fine: fractions[i + 1], excess: spectra[i + 1].deviation_from(&cover) })
        })
        .collect()
}
