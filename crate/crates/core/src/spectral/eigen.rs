//! Eigenvalue kernels for Jacobi matrices.
//!
//! [`CyclicJacobi`] is the `q × q` Floquet matrix of a `q`-periodic Jacobi
//! operator at Bloch momentum `k`. Eigenvalues are located by bisection on an
//! inertia count from an `L D L*` factorization that carries the corner fill in
//! the last column, so a count costs `O(q)`. [`Tridiagonal`] does the same for
//! open chains (finite sections, decoupled blocks). The dense path goes through
//! `nalgebra`'s Hermitian eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;

const PIVMIN: f64 = 1e-290;
const MAX_BISECT: usize = 200;

/// Reliability above which a single cut's count is accepted outright.
const CONFIDENT: f64 = 0.1;

/// Which eigensolver backs the Floquet computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenPath {
    /// Dense for `q <= 1000`, inertia bisection above.
    #[default]
    Auto,
    Dense,
    Bisection,
}

impl EigenPath {
    pub fn use_dense(self, q: usize) -> bool {
        match self {
            EigenPath::Auto => q <= 1000,
            EigenPath::Dense => true,
            EigenPath::Bisection => false,
        }
    }
}

/// Periodic Jacobi matrix with Bloch phase: `H[n][n+1] = b_n` for `n < q−1`,
/// `H[q−1][0] = b_{q−1} e^{ik}`, Hermitian completion.
#[derive(Debug, Clone)]
pub struct CyclicJacobi {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub k: f64,
}

impl CyclicJacobi {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, k: f64) -> Self {
        assert_eq!(diag.len(), off.len(), "periodic Jacobi needs q diagonal and q bond entries");
        assert!(!diag.is_empty());
        CyclicJacobi { diag, off, k }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn corner(&self) -> Complex64 {
        let q = self.len();
        Complex64::from_polar(self.off[q - 1], self.k)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let q = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..q {
            let r = self.off[i].abs() + self.off[(i + q - 1) % q].abs();
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues `<= x` (eigenvalues equal to `x` up to the pivot
    /// floor are counted).
    ///
    /// Sylvester inertia of `H − x`, split into an open chain plus a Schur
    /// complement on the sites cut out of the ring. The complement needs three
    /// entries of the chain resolvent, all of which follow from forward and
    /// backward Sturm pivots. Two cuts are evaluated and the one whose
    /// complement lost less to cancellation is trusted:
    ///
    /// * one site: a scalar complement, which is rounding noise at a double
    ///   eigenvalue of `H` (by interlacing, a double eigenvalue is an
    ///   eigenvalue of every `(q−1)`-site chain);
    /// * two adjacent sites: a 2 × 2 complement, unaffected by double
    ///   eigenvalues.
    ///
    /// Both degrade next to a chain eigenvalue, where forward and backward
    /// pivots place the pole at slightly different energies and the pole
    /// terms stop combining, so the cancellation measure is discounted by the
    /// distance to a chain pole.
    ///
    /// Each cut is tried at the Bloch bond and across the weakest bond (the
    /// Bloch phase can be gauged onto any bond).
    pub fn count_below(&self, x: f64) -> usize {
        let q = self.len();
        if q == 1 {
            let e = self.diag[0] + 2.0 * self.off[0] * self.k.cos();
            return usize::from(e <= x);
        }
        // An exactly singular chain (odd length, zero diagonal, x = 0 is the
        // typical case) is sidestepped by moving x up a few ulps.
        let (lo, hi) = self.bounds();
        let width = hi - lo;
        let mut step = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        let mut at = x;
        // cutting across the weakest bond splits nearly decoupled blocks
        let weak = (0..q).min_by(|&a, &b| self.off[a].abs().total_cmp(&self.off[b].abs())).map_or(0, |c| (c + 1) % q);
        for _ in 0..8 {
            // the plain cut is almost always well conditioned; skip the rest then
            let first = self.count_cut_one(at, 0, width);
            if let Some((n, rel)) = first {
                if rel >= CONFIDENT {
                    return n;
                }
            }
            let candidates = [
                first,
                self.count_cut_two(at, 0, width),
                self.count_cut_one(at, weak, width),
                self.count_cut_two(at, weak, width),
            ];
            let best = candidates.into_iter().flatten().max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((n, _)) = best {
                return n;
            }
            at = x + step;
            step *= 4.0;
        }
        q
    }

    /// Resolvent data of the open chain on sites `first..=last` of the ring
    /// rotated by `r` (site `i` is `(i + r) mod q`) at `x`:
    /// negative pivots, `G(first, first)`, `G(last, last)`, `G(first, last)`.
    /// `None` when a pivot vanishes exactly.
    fn chain_resolvent(&self, r: usize, first: usize, last: usize, x: f64) -> Option<(usize, f64, f64, f64)> {
        let q = self.len();
        let v = |i: usize| self.diag[(i + r) % q];
        let b = |i: usize| self.off[(i + r) % q];
        let mut neg = 0;
        let mut d = 0.0;
        // Π b_i / d_i over the inner bonds, with a separate binary exponent
        let mut prod = 1.0f64;
        let mut prod_exp = 0i32;
        for i in first..=last {
            d = if i == first { v(i) - x } else { v(i) - x - b(i - 1) * b(i - 1) / d };
            if d.abs() < PIVMIN {
                return None;
            }
            if d < 0.0 {
                neg += 1;
            }
            if i < last {
                prod *= b(i) / d;
                if prod != 0.0 && !(1e-150..=1e150).contains(&prod.abs()) {
                    let e = prod.abs().log2().floor() as i32;
                    prod *= (-e as f64).exp2();
                    prod_exp += e;
                }
            }
        }
        let g_last = 1.0 / d;
        let mut e = v(last) - x;
        for i in (first..last).rev() {
            if e.abs() < PIVMIN {
                return None;
            }
            e = v(i) - x - b(i) * b(i) / e;
        }
        if e.abs() < PIVMIN {
            return None;
        }
        let sign = if (last - first) % 2 == 0 { 1.0 } else { -1.0 };
        let g_cross = sign * prod * g_last * (prod_exp.clamp(-1000, 1000) as f64).exp2();
        Some((neg, 1.0 / e, g_last, g_cross))
    }


    /// Cut the last site of the ring rotated by `r`; returns the count and
    /// `|s| / Σ|terms of s|`, discounted by the distance to a chain pole.
    fn count_cut_one(&self, x: f64, r: usize, width: f64) -> Option<(usize, f64)> {
        let q = self.len();
        let corner = Complex64::from_polar(self.off[(q - 1 + r) % q], self.k);
        let v = |i: usize| self.diag[(i + r) % q];
        let b = |i: usize| self.off[(i + r) % q];
        let (neg, s, mass, margin) = if q == 2 {
            let d = v(0) - x;
            if d.abs() < PIVMIN {
                return None;
            }
            let w = corner.conj() + b(0);
            let t = w.norm_sqr() / d;
            (usize::from(d < 0.0), v(1) - x - t, (v(1) - x).abs() + t.abs(), pole_margin(width, 1.0 / d, 0.0))
        } else {
            let (neg, g_first, g_last, g_cross) = self.chain_resolvent(r, 0, q - 2, x)?;
            let w_first = corner.norm_sqr();
            let w_last = b(q - 2) * b(q - 2);
            let cross = 2.0 * b(q - 1) * b(q - 2) * self.k.cos();
            let terms = [v(q - 1) - x, -w_first * g_first, -w_last * g_last, -cross * g_cross];
            let margin = pole_margin(width, g_first, g_last);
            (neg, terms.iter().sum::<f64>(), terms.iter().map(|t| t.abs()).sum::<f64>(), margin)
        };
        if !s.is_finite() || s.abs() < PIVMIN {
            return None;
        }
        Some((neg + usize::from(s < 0.0), margin * s.abs() / mass))
    }

    /// Cut the first and last sites of the ring rotated by `r`; returns the
    /// count and `|det S| / (|S₀₀ S₁₁| + |S₁₀|²)`, discounted by the distance
    /// to a chain pole.
    fn count_cut_two(&self, x: f64, r: usize, width: f64) -> Option<(usize, f64)> {
        let q = self.len();
        let corner = Complex64::from_polar(self.off[(q - 1 + r) % q], self.k);
        let (mut s00, mut s11) = (self.diag[r % q] - x, self.diag[(q - 1 + r) % q] - x);
        let (neg, s10, margin) = if q == 2 {
            (0, corner + self.off[r % q], 1.0)
        } else {
            let (neg, g_first, g_last, g_cross) = self.chain_resolvent(r, 1, q - 2, x)?;
            let (b_in, b_out) = (self.off[r % q], self.off[(q - 2 + r) % q]);
            s00 -= b_in * b_in * g_first;
            s11 -= b_out * b_out * g_last;
            let margin = pole_margin(width, g_first, g_last);
            (neg, corner - b_in * b_out * g_cross, margin)
        };
        // positive rescaling keeps the inertia and avoids overflow in the determinant
        let scale = s00.abs().max(s11.abs()).max(s10.norm());
        if !scale.is_finite() {
            return None;
        }
        if scale == 0.0 {
            return Some((neg + 2, 0.0));
        }
        let (a, c, w) = (s00 / scale, s11 / scale, s10.norm() / scale);
        let det = a * c - w * w;
        let tr = a + c;
        let n = if det < 0.0 {
            1
        } else if det > 0.0 {
            2 * usize::from(tr < 0.0)
        } else {
            1 + usize::from(tr <= 0.0)
        };
        let mass = (a * c).abs() + w * w;
        Some((neg + n, margin * if mass > 0.0 { det.abs() / mass } else { 0.0 }))
    }

    /// The `j`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (lo, hi) = self.bounds();
        bisect_index(|x| self.count_below(x), j, lo - 1e-12, hi + 1e-12)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let mut out = Vec::with_capacity(self.len());
        all_by_bisection(&|x| self.count_below(x), lo - 1e-12, hi + 1e-12, 0, self.len(), &mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let q = self.len();
        let mut m = DMatrix::<Complex64>::zeros(q, q);
        for i in 0..q {
            m[(i, i)] += Complex64::new(self.diag[i], 0.0);
        }
        for i in 0..q - 1 {
            m[(i, i + 1)] += Complex64::new(self.off[i], 0.0);
            m[(i + 1, i)] += Complex64::new(self.off[i], 0.0);
        }
        let c = self.corner();
        m[(q - 1, 0)] += c;
        m[(0, q - 1)] += c.conj();
        m
    }

    /// The real symmetric matrix at `k ∈ {0, π}`, `None` otherwise.
    pub fn to_dense_real(&self) -> Option<DMatrix<f64>> {
        if self.k.sin().abs() >= 1e-15 {
            return None;
        }
        let q = self.len();
        let mut m = DMatrix::<f64>::zeros(q, q);
        let c = self.corner().re;
        for i in 0..q {
            m[(i, i)] += self.diag[i];
        }
        for i in 0..q - 1 {
            m[(i, i + 1)] += self.off[i];
            m[(i + 1, i)] += self.off[i];
        }
        m[(q - 1, 0)] += c;
        m[(0, q - 1)] += c;
        Some(m)
    }

    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if let Some(m) = self.to_dense_real() {
            m.symmetric_eigenvalues().iter().copied().collect()
        } else {
            self.to_dense().symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// The `j`-th smallest eigenvalue through `path`.
    pub fn eigenvalue_of(&self, j: usize, path: EigenPath) -> f64 {
        if path.use_dense(self.len()) {
            self.dense_eigenvalues()[j]
        } else {
            self.eigenvalue(j)
        }
    }

    pub fn eigenvalues_with(&self, path: EigenPath) -> Vec<f64> {
        if path.use_dense(self.len()) {
            self.dense_eigenvalues()
        } else {
            self.eigenvalues()
        }
    }
}

/// Discount for a Schur complement evaluated next to a chain pole.
fn pole_margin(width: f64, g_first: f64, g_last: f64) -> f64 {
    1.0 / (1.0 + width * g_first.abs().max(g_last.abs()))
}

/// Open symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(off.len() + 1, diag.len());
        Tridiagonal { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Sturm count of eigenvalues `<= x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut neg = 0;
        let mut d = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                d = self.diag[i] - x - e * e / d;
            }
            if d.abs() < PIVMIN {
                d = -PIVMIN;
            }
            if d < 0.0 {
                neg += 1;
            }
        }
        neg
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let mut out = Vec::with_capacity(self.len());
        all_by_bisection(&|x| self.count_below(x), lo - 1e-12, hi + 1e-12, 0, self.len(), &mut out);
        out
    }

    /// Eigenvalues in the open interval `(lo, hi)`, ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(hi > lo) {
            return Vec::new();
        }
        let c_lo = self.count_below(lo);
        let c_hi = self.count_below(hi.next_down());
        let mut out = Vec::new();
        if c_hi > c_lo {
            all_by_bisection(&|x| self.count_below(x), lo, hi, c_lo, c_hi, &mut out);
        }
        out
    }

    /// Unit eigenvector for an eigenvalue `lambda` computed by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let scale = self.diag.iter().chain(&self.off).fold(1.0f64, |m, x| m.max(x.abs()));
        let shift = lambda + 4.0 * f64::EPSILON * scale;
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..3 {
            x = solve_shifted(self, shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}

/// Solves `(T − σ) x = rhs` by Gaussian elimination with partial pivoting.
fn solve_shifted(t: &Tridiagonal, sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n == 1 {
        let p = t.diag[0] - sigma;
        let p = if p.abs() < PIVMIN { PIVMIN } else { p };
        return vec![rhs[0] / p];
    }
    // u[i] holds row i of U at columns i, i+1, i+2.
    let mut u: Vec<[f64; 3]> = (0..n)
        .map(|i| [t.diag[i] - sigma, if i + 1 < n { t.off[i] } else { 0.0 }, 0.0])
        .collect();
    let mut sub: Vec<f64> = (0..n).map(|i| if i > 0 { t.off[i - 1] } else { 0.0 }).collect();
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if sub[i + 1].abs() > u[i][0].abs() {
            let row_i = [sub[i + 1], u[i + 1][0], u[i + 1][1]];
            let row_next = u[i];
            u[i] = row_i;
            sub[i + 1] = row_next[0];
            u[i + 1] = [row_next[1], row_next[2], 0.0];
            b.swap(i, i + 1);
        }
        if u[i][0].abs() < PIVMIN {
            u[i][0] = PIVMIN;
        }
        let f = sub[i + 1] / u[i][0];
        u[i + 1][0] -= f * u[i][1];
        u[i + 1][1] -= f * u[i][2];
        b[i + 1] -= f * b[i];
        sub[i + 1] = 0.0;
    }
    if u[n - 1][0].abs() < PIVMIN {
        u[n - 1][0] = PIVMIN;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u[i][1] * x[i + 1];
        }
        if i + 2 < n {
            s -= u[i][2] * x[i + 2];
        }
        x[i] = s / u[i][0];
    }
    x
}

fn converged(lo: f64, hi: f64) -> bool {
    hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 4.0 * PIVMIN
}

/// Smallest `x` with `count(x) > j`, by bisection on `[lo, hi]`.
pub(crate) fn bisect_index(count: impl Fn(f64) -> usize, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || converged(lo, hi) {
            break;
        }
        if count(mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues with indices `c_lo..c_hi` inside `(lo, hi]`, where
/// `count(lo) = c_lo` and `count(hi) = c_hi`.
fn all_by_bisection(
    count: &dyn Fn(f64) -> usize,
    lo: f64,
    hi: f64,
    c_lo: usize,
    c_hi: usize,
    out: &mut Vec<f64>,
) {
    if c_hi <= c_lo {
        return;
    }
    let mid = 0.5 * (lo + hi);
    if converged(lo, hi) || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat(mid).take(c_hi - c_lo));
        return;
    }
    if c_hi - c_lo == 1 {
        out.push(bisect_index(count, c_lo, lo, hi));
        return;
    }
    let c_mid = count(mid).clamp(c_lo, c_hi);
    all_by_bisection(count, lo, mid, c_lo, c_mid, out);
    all_by_bisection(count, mid, hi, c_mid, c_hi, out);
}
