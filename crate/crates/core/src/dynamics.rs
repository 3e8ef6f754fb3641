//! Transfer-matrix cocycle, Lyapunov exponents and the Thouless formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Alpha, CoefficientFamily, SampledOperator, SINGULAR_THRESHOLD};
use crate::quad;
use crate::spectral::IdsSample;

/// Product of one-step transfer matrices with a separate log-scale factor.
///
/// The true product is `matrix * exp(log_scale)`; `matrix` is kept at unit
/// Frobenius norm. The determinant is accumulated step by step, since it
/// cannot be recovered from a normalized product whose norm has grown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferState {
    pub matrix: [[f64; 2]; 2],
    pub log_scale: f64,
    pub steps: usize,
    log_abs_det: f64,
    det_negative: bool,
}

impl TransferState {
    pub fn identity() -> Self {
        TransferState {
            matrix: [[1.0, 0.0], [0.0, 1.0]],
            log_scale: 0.0,
            steps: 0,
            log_abs_det: 0.0,
            det_negative: false,
        }
    }

    fn frobenius(m: &[[f64; 2]; 2]) -> f64 {
        (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
    }

    /// Left-multiplies by `a` and renormalizes.
    pub fn push(&mut self, a: [[f64; 2]; 2]) {
        let da = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        self.log_abs_det += da.abs().ln();
        self.det_negative ^= da < 0.0;
        let m = self.matrix;
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * m[0][j] + a[i][1] * m[1][j];
            }
        }
        let f = Self::frobenius(&r);
        if f > 0.0 && f.is_finite() {
            for row in r.iter_mut() {
                for x in row.iter_mut() {
                    *x /= f;
                }
            }
            self.log_scale += f.ln();
        }
        self.matrix = r;
        self.steps += 1;
    }

    fn det_stored(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `ln ‖A_n‖` in the operator 2-norm.
    pub fn log_norm(&self) -> f64 {
        let m = &self.matrix;
        let f2 = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
        let d = self.det_stored();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        let s_max = ((f2 + disc) / 2.0).sqrt();
        s_max.ln() + self.log_scale
    }

    /// `ln |det A_n|`.
    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    /// `tr A_n`; overflows to `±∞` when the product is huge.
    pub fn trace(&self) -> f64 {
        let t = self.matrix[0][0] + self.matrix[1][1];
        t * self.log_scale.exp()
    }

    pub fn det(&self) -> f64 {
        let d = self.log_abs_det.exp();
        if self.det_negative { -d } else { d }
    }

    /// Determinant read off the stored product; only accurate while the
    /// product stays moderate.
    pub fn product_det(&self) -> f64 {
        self.det_stored() * (2.0 * self.log_scale).exp()
    }
}

/// One-step transfer matrix at orbit position `n`.
fn one_step(op: &SampledOperator<'_>, n: i64, energy: f64) -> Result<[[f64; 2]; 2]> {
    let b = op.b(n);
    if b.abs() <= SINGULAR_THRESHOLD {
        return Err(Error::SingularPhase { step: n, theta: op.theta, value: b.abs() });
    }
    let b_prev = op.b(n - 1);
    Ok([[(energy - op.v(n)) / b, -b_prev / b], [1.0, 0.0]])
}

/// `A^E_n(θ) = A^E(θ + (n−1)α) ⋯ A^E(θ)`.
pub fn transfer_product(
    family: &CoefficientFamily,
    alpha: impl Into<Alpha>,
    theta: f64,
    energy: f64,
    n: usize,
) -> Result<TransferState> {
    let op = SampledOperator::new(family, alpha, theta);
    let mut state = TransferState::identity();
    for step in 0..n as i64 {
        state.push(one_step(&op, step, energy)?);
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub energy: f64,
    /// Estimate in nats per step.
    pub lyapunov: f64,
    pub stderr: f64,
    pub steps: usize,
    pub theta_samples: usize,
}

const RESAMPLE_CAP: usize = 64;

/// Monte-Carlo average of `(1/n) ln ‖A^E_n(θ)‖` over seeded uniform phases.
pub fn lyapunov_numeric(
    family: &CoefficientFamily,
    alpha: impl Into<Alpha>,
    energy: f64,
    n: usize,
    theta_count: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if n < 100 || theta_count < 10 {
        return Err(Error::InvalidInput(format!(
            "lyapunov_numeric needs n >= 100 and at least 10 phases (got n = {n}, phases = {theta_count})"
        )));
    }
    let alpha = alpha.into();
    let samples: Vec<f64> = (0..theta_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut last_err = None;
            for _ in 0..RESAMPLE_CAP {
                let theta: f64 = rng.gen_range(0.0..1.0);
                match transfer_product(family, alpha, theta, energy, n) {
                    Ok(state) => return Ok(state.log_norm() / n as f64),
                    Err(e @ Error::SingularPhase { .. }) => last_err = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last_err.expect("resampling loop ran"))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(LyapunovEstimate {
        energy,
        lyapunov: mean,
        stderr: (var / k).sqrt(),
        steps: n,
        theta_samples: theta_count,
    })
}

/// `∫_0^1 ln |b(θ)| dθ`, with the logarithmic singularity at each simple zero
/// of `b` integrated in closed form.
pub fn log_b_integral(family: &CoefficientFamily) -> Result<f64> {
    if let Some(z) = family.non_simple_zero() {
        return Err(Error::NonSimpleZero(z));
    }
    let f = |x: f64| family.b_at(x).abs().ln();
    let mut zeros = family.b_zeros.clone();
    zeros.sort_by(f64::total_cmp);
    if zeros.is_empty() {
        return Ok(quad::integrate(f, 0.0, 1.0, 64));
    }
    let m = zeros.len();
    let mut sep = 1.0f64;
    for i in 0..m {
        let next = if i + 1 < m { zeros[i + 1] } else { zeros[0] + 1.0 };
        sep = sep.min(next - zeros[i]);
    }
    let r = (0.25 * sep).min(0.05);
    let mut total = 0.0;
    for i in 0..m {
        let z = zeros[i];
        let slope = family.b_deriv_at(z);
        // ∫_{-r}^{r} ln|b'(z) u| du
        total += 2.0 * r * slope.abs().ln() + 2.0 * (r * r.ln() - r);
        let smooth = |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                (family.b_at(z + u) / (slope * u)).abs().ln()
            }
        };
        total += quad::integrate(smooth, -r, 0.0, 8) + quad::integrate(smooth, 0.0, r, 8);
        let next = if i + 1 < m { zeros[i + 1] } else { zeros[0] + 1.0 };
        total += quad::integrate(f, z + r, next - r, 32);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThoulessValue {
    pub lyapunov: f64,
    /// Change of the value when every other grid point is dropped.
    pub richardson_delta: f64,
    /// Set when `richardson_delta` exceeds the requested tolerance.
    pub unstable: bool,
}

/// `∫ ln|E − x| dN(x)` for a piecewise-linear `N` through the samples.
fn log_potential(energies: &[f64], values: &[f64], e: f64) -> f64 {
    let g = |x: f64| {
        let u = x - e;
        if u == 0.0 { -x } else { u * u.abs().ln() - x }
    };
    let mut total = 0.0;
    let n = energies.len();
    if values[0] > 0.0 {
        total += values[0] * (e - energies[0]).abs().ln();
    }
    for i in 0..n - 1 {
        let dn = values[i + 1] - values[i];
        if dn == 0.0 {
            continue;
        }
        let h = energies[i + 1] - energies[i];
        if h <= 0.0 {
            total += dn * (e - energies[i]).abs().ln();
        } else {
            total += dn / h * (g(energies[i + 1]) - g(energies[i]));
        }
    }
    let top = 1.0 - values[n - 1];
    if top > 0.0 {
        total += top * (e - energies[n - 1]).abs().ln();
    }
    total
}

/// Thouless formula `L(E) = −∫ ln|b| + ∫ ln|E − x| dN(x)` on an IDS sample.
pub fn thouless_l(family: &CoefficientFamily, ids: &IdsSample, energy: f64, tolerance: f64) -> Result<ThoulessValue> {
    if ids.energies.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: ids.energies.len() });
    }
    let base = -log_b_integral(family)?;
    let fine = log_potential(&ids.energies, &ids.values, energy);
    let (ce, cv): (Vec<f64>, Vec<f64>) = ids
        .energies
        .iter()
        .zip(&ids.values)
        .enumerate()
        .filter(|(i, _)| i % 2 == 0 || *i == ids.energies.len() - 1)
        .map(|(_, (e, v))| (*e, *v))
        .unzip();
    let coarse = log_potential(&ce, &cv, energy);
    let delta = (fine - coarse).abs();
    Ok(ThoulessValue { lyapunov: base + fine, richardson_delta: delta, unstable: delta > tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::Fraction;
    use crate::model::{make_family, CustomFamily, FamilyKind, TrigPoly};

    fn amo(lambda: f64) -> CoefficientFamily {
        make_family(FamilyKind::Amo { lambda }).unwrap()
    }

    #[test]
    fn one_step_amo() {
        let f = amo(1.0);
        let s = transfer_product(&f, Alpha::Real(0.3), 0.1, 0.7, 1).unwrap();
        let v = f.v_at(0.1);
        let m = s.matrix;
        let scale = s.log_scale.exp();
        let want = [[0.7 - v, -1.0], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] * scale - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_phase_is_reported() {
        let c = make_family(FamilyKind::ChiralAmo).unwrap();
        let err = transfer_product(&c, Fraction::new(1, 4).unwrap(), 0.0, 0.3, 5).unwrap_err();
        assert!(matches!(err, Error::SingularPhase { step: 0, .. }));
    }

    #[test]
    fn determinant_telescopes() {
        let c = make_family(FamilyKind::ChiralAmo).unwrap();
        let alpha = Alpha::Real((5f64.sqrt() - 1.0) / 2.0);
        for n in [1usize, 2, 5, 17, 40] {
            let theta = 0.137;
            let s = transfer_product(&c, alpha, theta, 0.4, n).unwrap();
            let op = SampledOperator::new(&c, alpha, theta);
            let expected = op.b(-1).abs().ln() - op.b(n as i64 - 1).abs().ln();
            assert!((s.log_abs_det() - expected).abs() < 1e-8, "n = {n}");
            if n <= 5 {
                assert!((s.product_det() - s.det()).abs() < 1e-10 * s.det().abs());
            }
        }
    }

    #[test]
    fn growth_outside_spectrum() {
        let s = transfer_product(&amo(1.0), Alpha::Real(0.618), 0.2, 10.0, 200).unwrap();
        assert!(s.log_norm() / 200.0 > 1.0);
    }

    #[test]
    fn log_b_integrals() {
        let chiral = make_family(FamilyKind::ChiralAmo).unwrap();
        assert!(log_b_integral(&chiral).unwrap().abs() < 1e-8);
        assert_eq!(log_b_integral(&amo(1.0)).unwrap(), 0.0);
        let four_sin = make_family(FamilyKind::Custom(CustomFamily {
            name: "4sin".into(),
            v: TrigPoly::constant(0.0),
            b: TrigPoly::sin(4.0, 1),
            v_deriv_max: 0.0,
            b_deriv_max: 8.0 * std::f64::consts::PI,
            b_zeros: vec![0.0, 0.5],
        }))
        .unwrap();
        assert!((log_b_integral(&four_sin).unwrap() - 2f64.ln()).abs() < 1e-8);
        let shifted = make_family(FamilyKind::ShiftedChiralAmo { alpha: 0.3 }).unwrap();
        assert!(log_b_integral(&shifted).unwrap().abs() < 1e-8);
    }

    #[test]
    fn log_b_integral_without_zeros() {
        // ∫ ln(1 + a cos 2πθ) = ln((1 + sqrt(1 − a²)) / 2)
        let a: f64 = 0.5;
        let mut b = TrigPoly::cos(a, 1);
        b.constant = 1.0;
        let fam = make_family(FamilyKind::Custom(CustomFamily {
            name: "shifted-cos".into(),
            v: TrigPoly::constant(0.0),
            b,
            v_deriv_max: 0.0,
            b_deriv_max: 2.0 * std::f64::consts::PI * a,
            b_zeros: vec![],
        }))
        .unwrap();
        let want = ((1.0 + (1.0 - a * a).sqrt()) / 2.0).ln();
        assert!((log_b_integral(&fam).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_arguments_are_checked() {
        assert!(lyapunov_numeric(&amo(1.0), Alpha::Real(0.6), 0.0, 50, 20, 1).is_err());
        assert!(lyapunov_numeric(&amo(1.0), Alpha::Real(0.6), 0.0, 500, 5, 1).is_err());
    }

    #[test]
    fn lyapunov_is_reproducible() {
        let a = lyapunov_numeric(&amo(1.0), Alpha::Real(0.6180339887), 5.0, 500, 16, 9).unwrap();
        let b = lyapunov_numeric(&amo(1.0), Alpha::Real(0.6180339887), 5.0, 500, 16, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.stderr >= 0.0);
    }

    #[test]
    fn log_potential_of_point_mass_and_uniform() {
        // Uniform density on [0, 1] at E = 2: ∫ ln(2 − x) dx = 2 ln 2 − 1.
        let e: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let v = e.clone();
        assert!((log_potential(&e, &v, 2.0) - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
        // Same at E = 0.5 (inside the support): ∫ ln|x − 1/2| dx = −ln 2 − 1.
        assert!((log_potential(&e, &v, 0.5) - (-(2f64.ln()) - 1.0)).abs() < 1e-12);
    }
}
