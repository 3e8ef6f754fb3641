//! Direct-sum spectra `σ(M) = ∪_θ σ(H_θ)` for rational frequencies.
//!
//! Fibers repeat with period `1/q` in θ, so only `[0, 1/q]` is swept. Band `j`
//! of a fiber is the range of the `j`-th Floquet eigenvalue `λ_j(θ, k)` over
//! `k ∈ [0, π]`, attained at the ends, so the union of band `j` over θ is
//! `[min_θ min_k λ_j, max_θ max_k λ_j]` with `k ∈ {0, π}`. Each `λ_j(·, k)` is
//! Lipschitz with constant `M = sup|v'| + 2 sup|b'|`; where it stays simple
//! with gap `g` it also has `|λ''| ≤ sup|v''| + 2 sup|b''| + 2M²/g`, which is
//! what makes flat band edges affordable to certify.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::eigen::EigenPath;
use super::{floquet_matrix, BandSet, MERGE_TOL};
use crate::contfrac::Fraction;
use crate::error::{Error, Result};
use crate::model::{CoefficientFamily, SampledOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Certify every edge with branch-and-bound. Without it edges are located
    /// on a grid and polished by golden-section search.
    pub certify: bool,
    /// Evaluation budget per band edge in certified mode.
    pub max_evals: usize,
    /// Initial θ cells on `[0, 1/q]`.
    pub initial_cells: usize,
    pub path: EigenPath,
    /// Skip the closed-form almost Mathieu path.
    pub force_sweep: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { certify: true, max_evals: 500_000, initial_cells: 64, path: EigenPath::Auto, force_sweep: false }
    }
}

/// Over-approximation `U ⊇ σ(M_{p/q})` with `|U| − |σ| ≤ tol`.
pub fn union_spectrum(family: &CoefficientFamily, frac: Fraction, tol: f64) -> Result<BandSet> {
    union_spectrum_with(family, frac, tol, &SweepOptions::default())
}

pub fn union_spectrum_with(
    family: &CoefficientFamily,
    frac: Fraction,
    tol: f64,
    opts: &SweepOptions,
) -> Result<BandSet> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if family.is_amo() && !opts.force_sweep {
        return Ok(amo_union(family, frac, opts.path));
    }
    sweep(family, frac, tol, opts)
}

/// `Δ(E, θ) = F(E) − 2λ^q cos 2πqθ`, so the union is `|F| ≤ 2 + 2λ^q`. Its
/// edges are the `k = 0` eigenvalues at `θ = 0` and the `k = π` eigenvalues at
/// `θ = 1/(2q)`.
fn amo_union(family: &CoefficientFamily, frac: Fraction, path: EigenPath) -> BandSet {
    let q = frac.q as f64;
    let mut edges = floquet_matrix(family, frac, 0.0, 0.0).eigenvalues_with(path);
    edges.extend(floquet_matrix(family, frac, 0.5 / q, PI).eigenvalues_with(path));
    edges.sort_by(f64::total_cmp);
    BandSet::new(edges.chunks(2).map(|c| (c[0], c[1])), MERGE_TOL)
}

/// Up to this period levels come with eigenvectors from the dense solver,
/// which enables the cluster bound; above it levels are bisected.
const DENSE_LEVEL_MAX_Q: usize = 64;

/// Spacings below which neighbouring levels are grouped into one cluster,
/// relative to the spectral radius.
const CLUSTER_SPACINGS: [f64; 3] = [1e-9, 1e-6, 1e-3];

/// Bounds shared by every level of one family.
#[derive(Debug, Clone, Copy)]
struct Smoothness {
    /// `sup ‖∂H/∂θ‖`.
    lipschitz: f64,
    /// `sup ‖∂²H/∂θ²‖`.
    curvature: f64,
}

/// Level `j` of the Floquet matrix at one phase.
#[derive(Debug, Clone)]
struct Level {
    value: f64,
    /// Distance to the neighbouring levels.
    gap: f64,
    /// `(‖UᵀH'U‖_F, isolation gap)` for clusters of levels around `j`, `U`
    /// the cluster's eigenvectors.
    clusters: Vec<(f64, f64)>,
}

impl Level {
    /// Largest possible `|λ_j(θ) − λ_j(c)|` for `|θ − c| ≤ r`: first order
    /// through the compressed derivative, second order through `H''`, and
    /// the quadratic residual bound for the part leaking out of the cluster.
    fn drift(&self, r: f64, s: Smoothness) -> f64 {
        let m = s.lipschitz;
        let mut best = m * r;
        for &(a, g) in &self.clusters {
            let eta = g - 2.0 * m * r;
            if eta > 0.0 {
                best = best.min(a * r + 0.5 * s.curvature * r * r + m * m * r * r / eta);
            }
        }
        best
    }
}

/// Distance from `ev[j]` to its neighbours.
fn gap_of(ev: &[f64], j: usize) -> f64 {
    let below = if j > 0 { ev[j] - ev[j - 1] } else { f64::INFINITY };
    let above = if j + 1 < ev.len() { ev[j + 1] - ev[j] } else { f64::INFINITY };
    below.min(above)
}

/// `∂H/∂θ` at `theta` for real Bloch phase `k`, applied to `u`.
fn apply_derivative(family: &CoefficientFamily, frac: Fraction, theta: f64, k: f64, u: &[f64]) -> Vec<f64> {
    let q = u.len();
    let op = SampledOperator::new(family, frac, theta);
    let dv: Vec<f64> = (0..q as i64).map(|n| family.v_deriv_at(op.phase(n))).collect();
    let mut db: Vec<f64> = (0..q as i64).map(|n| family.b_deriv_at(op.phase(n))).collect();
    db[q - 1] *= k.cos();
    (0..q)
        .map(|n| {
            let prev = (n + q - 1) % q;
            let next = (n + 1) % q;
            let mut x = dv[n] * u[n];
            if q == 1 {
                return x + 2.0 * db[0] * u[0];
            }
            x += db[prev] * u[prev] + db[n] * u[next];
            x
        })
        .collect()
}

/// All levels of the real Floquet matrix at `theta`, with cluster data.
fn dense_levels(family: &CoefficientFamily, frac: Fraction, theta: f64, k: f64, only: Option<usize>) -> Vec<Level> {
    let m = floquet_matrix(family, frac, theta, k).to_dense_real().expect("real Bloch phase");
    let eig = m.symmetric_eigen();
    let q = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let ev: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = ev[0].abs().max(ev[q - 1].abs()).max(1.0);
    let vector = |i: usize| -> Vec<f64> { eig.eigenvectors.column(order[i]).iter().copied().collect() };
    let derivs: Vec<Vec<f64>> = (0..q).map(|i| apply_derivative(family, frac, theta, k, &vector(i))).collect();
    let coupling = |lo: usize, hi: usize| -> f64 {
        let mut sum = 0.0;
        for a in lo..=hi {
            let ua = vector(a);
            for b in lo..=hi {
                let x: f64 = ua.iter().zip(&derivs[b]).map(|(p, q)| p * q).sum();
                sum += x * x;
            }
        }
        sum.sqrt()
    };
    let js: Vec<usize> = match only {
        Some(j) => vec![j],
        None => (0..q).collect(),
    };
    js.into_iter()
        .map(|j| {
            let mut clusters = Vec::new();
            let mut seen = Vec::new();
            for spacing in std::iter::once(0.0).chain(CLUSTER_SPACINGS.iter().map(|s| s * scale)) {
                let (mut lo, mut hi) = (j, j);
                while lo > 0 && ev[lo] - ev[lo - 1] <= spacing {
                    lo -= 1;
                }
                while hi + 1 < q && ev[hi + 1] - ev[hi] <= spacing {
                    hi += 1;
                }
                if seen.contains(&(lo, hi)) {
                    continue;
                }
                seen.push((lo, hi));
                let below = if lo > 0 { ev[lo] - ev[lo - 1] } else { f64::INFINITY };
                let above = if hi + 1 < q { ev[hi + 1] - ev[hi] } else { f64::INFINITY };
                clusters.push((coupling(lo, hi), below.min(above)));
            }
            Level { value: ev[j], gap: gap_of(&ev, j), clusters }
        })
        .collect()
}

fn level_at(family: &CoefficientFamily, frac: Fraction, theta: f64, k: f64, j: usize) -> Level {
    if frac.q as usize <= DENSE_LEVEL_MAX_Q {
        return dense_levels(family, frac, theta, k, Some(j)).remove(0);
    }
    let m = floquet_matrix(family, frac, theta, k);
    let lo = j.saturating_sub(1);
    let hi = (j + 1).min(m.len() - 1);
    let ev: Vec<f64> = (lo..=hi).map(|i| m.eigenvalue(i)).collect();
    Level { value: ev[j - lo], gap: gap_of(&ev, j - lo), clusters: Vec::new() }
}

fn all_levels(family: &CoefficientFamily, frac: Fraction, theta: f64, k: f64, path: EigenPath) -> Vec<Level> {
    if frac.q as usize <= DENSE_LEVEL_MAX_Q {
        return dense_levels(family, frac, theta, k, None);
    }
    let ev = floquet_matrix(family, frac, theta, k).eigenvalues_with(path);
    (0..ev.len()).map(|j| Level { value: ev[j], gap: gap_of(&ev, j), clusters: Vec::new() }).collect()
}

fn sweep(family: &CoefficientFamily, frac: Fraction, tol: f64, opts: &SweepOptions) -> Result<BandSet> {
    let q = frac.q as usize;
    let width = 1.0 / q as f64;
    let cells = opts.initial_cells.max(4);
    let thetas: Vec<f64> = (0..=cells).map(|m| width * m as f64 / cells as f64).collect();
    let ks = [0.0, PI];
    let grid: Vec<[Vec<Level>; 2]> = thetas
        .par_iter()
        .map(|&t| ks.map(|k| all_levels(family, frac, t, k, opts.path)))
        .collect();
    let eps = tol / (2.0 * q as f64);
    let smooth = Smoothness { lipschitz: family.motion_bound(), curvature: family.curvature_bound() };
    // task (j, k index, sign): sign +1 minimises λ_j, −1 maximises it
    let tasks: Vec<(usize, usize, f64)> =
        (0..q).flat_map(|j| (0..2).flat_map(move |ki| [(j, ki, 1.0), (j, ki, -1.0)])).collect();
    let extrema = tasks
        .par_iter()
        .map(|&(j, ki, sign)| {
            let m = if opts.certify {
                let f = |t: f64| level_at(family, frac, t, ks[ki], j);
                let samples: Vec<Level> = grid.iter().map(|g| g[ki][j].clone()).collect();
                certified_min(&f, sign, &thetas, samples, smooth, eps, opts.max_evals)
                    .ok_or(Error::BudgetExceeded { budget: opts.max_evals, tol })?
            } else {
                // one level by bisection is far cheaper than a full dense solve
                let path = if q <= DENSE_LEVEL_MAX_Q { opts.path } else { EigenPath::Bisection };
                let f = |t: f64| sign * floquet_matrix(family, frac, t, ks[ki]).eigenvalue_of(j, path);
                let values: Vec<f64> = grid.iter().map(|g| sign * g[ki][j].value).collect();
                polished_min(&f, &thetas, &values)
            };
            Ok(sign * m)
        })
        .collect::<Result<Vec<f64>>>()?;
    // extrema come in groups of four per band: (k=0 min, k=0 max, k=π min, k=π max)
    let bands = extrema.chunks(4).map(|c| (c[0].min(c[2]), c[1].max(c[3])));
    Ok(BandSet::new(bands, MERGE_TOL))
}

/// Phase resolution of the uncertified polish; levels are smooth near their
/// extrema, so the value error is quadratic in this.
const POLISH_WIDTH: f64 = 1e-10;

/// Brent's minimiser on `[a, b]` (parabolic steps with golden-section
/// fallback).
fn brent_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const C: f64 = 0.381_966_011_250_105_1;
    let mut x = a + C * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let tol = POLISH_WIDTH + 1e-12 * x.abs();
        if (x - m).abs() <= 2.0 * tol - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < 2.0 * tol || b - u < 2.0 * tol {
                    d = if x < m { tol } else { -tol };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = C * e;
        }
        let u = if d.abs() >= tol { x + d } else { x + tol.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u < x { b = x } else { a = x }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x { a = u } else { b = u }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    fx
}

/// Grid minimum polished around the two best grid points.
fn polished_min(f: &impl Fn(f64) -> f64, thetas: &[f64], samples: &[f64]) -> f64 {
    let h = thetas[1] - thetas[0];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&x, &y| samples[x].total_cmp(&samples[y]));
    let mut best = samples[order[0]];
    for &m in order.iter().take(2) {
        best = best.min(brent_min(f, thetas[m] - h, thetas[m] + h));
    }
    best
}

struct Cell {
    bound: f64,
    a: f64,
    b: f64,
    fa: Level,
    fb: Level,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // reversed so that BinaryHeap pops the smallest bound first
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.a.total_cmp(&self.a))
    }
}

/// Lower bound for `sign · λ_j` on `[a, b]`: the best of the Lipschitz cone,
/// the curvature bound between the endpoints, and the local models at each
/// endpoint.
fn cell(a: f64, b: f64, fa: Level, fb: Level, sign: f64, s: Smoothness) -> Cell {
    let h = b - a;
    let (va, vb) = (sign * fa.value, sign * fb.value);
    let mut bound = 0.5 * (va + vb) - 0.5 * s.lipschitz * h;
    // levels move by at most M h, so the gap stays above this on the cell
    let gap = fa.gap.max(fb.gap) - 2.0 * s.lipschitz * h;
    if gap > 0.0 {
        let k = s.curvature + 2.0 * s.lipschitz * s.lipschitz / gap;
        bound = bound.max(va.min(vb) - k * h * h / 8.0);
    }
    bound = bound.max(va - fa.drift(h, s)).max(vb - fb.drift(h, s));
    Cell { bound, a, b, fa, fb }
}

/// Lower bound `lb ≤ min sign·λ_j` with `min − lb ≤ eps`, or `None` once
/// `budget` evaluations are spent.
fn certified_min(
    f: &impl Fn(f64) -> Level,
    sign: f64,
    thetas: &[f64],
    samples: Vec<Level>,
    s: Smoothness,
    eps: f64,
    budget: usize,
) -> Option<f64> {
    let mut best = samples.iter().map(|l| sign * l.value).fold(f64::INFINITY, f64::min);
    let mut heap: BinaryHeap<Cell> = samples
        .windows(2)
        .enumerate()
        .map(|(m, w)| cell(thetas[m], thetas[m + 1], w[0].clone(), w[1].clone(), sign, s))
        .collect();
    let mut evals = 0;
    while let Some(c) = heap.pop() {
        if best - c.bound <= eps {
            return Some(c.bound.min(best));
        }
        if evals >= budget {
            return None;
        }
        let mid = 0.5 * (c.a + c.b);
        let fm = f(mid);
        evals += 1;
        best = best.min(sign * fm.value);
        heap.push(cell(c.a, mid, c.fa, fm.clone(), sign, s));
        heap.push(cell(mid, c.b, fm, c.fb, sign, s));
    }
    Some(best)
}
