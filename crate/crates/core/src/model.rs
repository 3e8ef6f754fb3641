//! Coefficient families `(v, b)` and their sampling along the orbit `θ + nα`.
//!
//! Every family is a pair of period-1 trigonometric polynomials. The operator
//! acts as
//!
//! ```text
//! (Hφ)(n) = b(θ + (n−1)α) φ(n−1) + b(θ + nα) φ(n+1) + v(θ + nα) φ(n).
//! ```

use std::f64::consts::PI;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::contfrac::Fraction;
use crate::error::{Error, Result};

/// Off-diagonal coefficients with `|b| <= SINGULAR_THRESHOLD` are treated as zero.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// `c + Σ_j (a_j cos 2π f_j x + s_j sin 2π f_j x)` with integer frequencies.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    pub constant: f64,
    pub terms: Vec<TrigTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: u32,
    pub cos: f64,
    pub sin: f64,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly { constant: c, terms: Vec::new() }
    }

    pub fn cos(amplitude: f64, freq: u32) -> Self {
        TrigPoly { constant: 0.0, terms: vec![TrigTerm { freq, cos: amplitude, sin: 0.0 }] }
    }

    pub fn sin(amplitude: f64, freq: u32) -> Self {
        TrigPoly { constant: 0.0, terms: vec![TrigTerm { freq, cos: 0.0, sin: amplitude }] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().fold(self.constant, |acc, t| {
            let (s, c) = (2.0 * PI * t.freq as f64 * x).sin_cos();
            acc + t.cos * c + t.sin * s
        })
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| {
            let w = 2.0 * PI * t.freq as f64;
            let (s, c) = (w * x).sin_cos();
            acc + w * (t.sin * c - t.cos * s)
        })
    }

    /// `Σ 2πf (|a| + |s|)`, an upper bound for `sup |p'|`.
    pub fn deriv_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| 2.0 * PI * t.freq as f64 * (t.cos.abs() + t.sin.abs()))
            .sum()
    }

    /// `Σ (2πf)² (|a| + |s|)`, an upper bound for `sup |p''|`.
    pub fn second_deriv_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| (2.0 * PI * t.freq as f64).powi(2) * (t.cos.abs() + t.sin.abs()))
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.cos == 0.0 && t.sin == 0.0)
    }
}

/// Which built-in (or custom) operator family to construct.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `v = 2λ cos 2πθ`, `b ≡ 1`.
    Amo { lambda: f64 },
    /// `v ≡ 0`, `b = 2 sin 2πθ`.
    ChiralAmo,
    /// The chiral family sampled at `θ + 1/4 + α/2`.
    ShiftedChiralAmo { alpha: f64 },
    Custom(CustomFamily),
}

impl FamilyKind {
    /// Parses `amo:<λ>`, `amo`, `chiral` or `shifted-chiral:<α>`.
    pub fn parse_builtin(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = s.split_once(':').map(|(h, a)| (h, Some(a))).unwrap_or((s, None));
        let num = |a: Option<&str>, what: &str| -> Result<f64> {
            let a = a.ok_or_else(|| Error::InvalidInput(format!("{what} needs an argument")))?;
            if let Ok(f) = a.parse::<Fraction>() {
                return Ok(f.value());
            }
            a.parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad {what} argument {a:?}: {e}")))
        };
        match head {
            "amo" => Ok(FamilyKind::Amo { lambda: if arg.is_some() { num(arg, "amo")? } else { 1.0 } }),
            "chiral" => Ok(FamilyKind::ChiralAmo),
            "shifted-chiral" => Ok(FamilyKind::ShiftedChiralAmo { alpha: num(arg, "shifted-chiral")? }),
            _ => Err(Error::InvalidInput(format!("unknown model {s:?}"))),
        }
    }
}

/// A user-supplied family with stated derivative bounds and zero set.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomFamily {
    pub name: String,
    pub v: TrigPoly,
    pub b: TrigPoly,
    pub v_deriv_max: f64,
    pub b_deriv_max: f64,
    pub b_zeros: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coef {
    Int(i64),
    Text(String),
}

impl Coef {
    fn value(&self) -> Result<f64> {
        match self {
            Coef::Int(i) => Ok(*i as f64),
            Coef::Text(s) => {
                let r: Rational64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidFamily(format!("coefficient {s:?} is not a rational")))?;
                Ok(*r.numer() as f64 / *r.denom() as f64)
            }
        }
    }
}

#[derive(Deserialize)]
struct TermSpec {
    freq: u32,
    #[serde(default)]
    cos: Option<Coef>,
    #[serde(default)]
    sin: Option<Coef>,
}

#[derive(Deserialize)]
struct PolySpec {
    #[serde(default)]
    constant: Option<Coef>,
    #[serde(default)]
    terms: Vec<TermSpec>,
}

#[derive(Deserialize)]
struct CustomSpec {
    name: String,
    v: PolySpec,
    b: PolySpec,
    v_deriv_max: f64,
    b_deriv_max: f64,
    #[serde(default)]
    b_zeros: Vec<f64>,
}

impl PolySpec {
    fn build(&self) -> Result<TrigPoly> {
        let constant = self.constant.as_ref().map(Coef::value).transpose()?.unwrap_or(0.0);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                if t.freq == 0 {
                    return Err(Error::InvalidFamily("use `constant` for frequency 0".into()));
                }
                Ok(TrigTerm {
                    freq: t.freq,
                    cos: t.cos.as_ref().map(Coef::value).transpose()?.unwrap_or(0.0),
                    sin: t.sin.as_ref().map(Coef::value).transpose()?.unwrap_or(0.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrigPoly { constant, terms })
    }
}

impl CustomFamily {
    /// Reads the JSON family description. Coefficients are integers or
    /// rational strings such as `"3/2"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CustomSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidFamily(format!("bad family JSON: {e}")))?;
        Ok(CustomFamily {
            name: spec.name,
            v: spec.v.build()?,
            b: spec.b.build()?,
            v_deriv_max: spec.v_deriv_max,
            b_deriv_max: spec.b_deriv_max,
            b_zeros: spec.b_zeros,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyTag {
    Amo,
    Chiral,
    ShiftedChiral,
    Custom,
}

/// The pair `(v, b)` defining a Jacobi family, with derivative bounds and zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFamily {
    pub name: String,
    pub tag: FamilyTag,
    pub v: TrigPoly,
    pub b: TrigPoly,
    /// Offset added to the phase before evaluating `v` and `b`.
    pub phase_offset: f64,
    pub v_deriv_max: f64,
    pub b_deriv_max: f64,
    /// Zeros of `θ ↦ b(θ + phase_offset)` in `[0, 1)`.
    pub b_zeros: Vec<f64>,
    pub lambda: Option<f64>,
}

pub fn make_family(kind: FamilyKind) -> Result<CoefficientFamily> {
    match kind {
        FamilyKind::Amo { lambda } => {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidFamily(format!("amo needs lambda > 0, got {lambda}")));
            }
            Ok(CoefficientFamily {
                name: format!("amo:{lambda}"),
                tag: FamilyTag::Amo,
                v: TrigPoly::cos(2.0 * lambda, 1),
                b: TrigPoly::constant(1.0),
                phase_offset: 0.0,
                v_deriv_max: 4.0 * PI * lambda,
                b_deriv_max: 0.0,
                b_zeros: Vec::new(),
                lambda: Some(lambda),
            })
        }
        FamilyKind::ChiralAmo => Ok(chiral("chiral".into(), FamilyTag::Chiral, 0.0)),
        FamilyKind::ShiftedChiralAmo { alpha } => Ok(chiral(
            format!("shifted-chiral:{alpha}"),
            FamilyTag::ShiftedChiral,
            (0.25 + alpha / 2.0).rem_euclid(1.0),
        )),
        FamilyKind::Custom(c) => {
            let fam = CoefficientFamily {
                name: c.name,
                tag: FamilyTag::Custom,
                v: c.v,
                b: c.b,
                phase_offset: 0.0,
                v_deriv_max: c.v_deriv_max,
                b_deriv_max: c.b_deriv_max,
                b_zeros: c.b_zeros.iter().map(|z| z.rem_euclid(1.0)).collect(),
                lambda: None,
            };
            fam.validate()?;
            Ok(fam)
        }
    }
}

fn chiral(name: String, tag: FamilyTag, offset: f64) -> CoefficientFamily {
    let mut zeros: Vec<f64> = [0.0, 0.5].iter().map(|z| (z - offset).rem_euclid(1.0)).collect();
    zeros.sort_by(f64::total_cmp);
    CoefficientFamily {
        name,
        tag,
        v: TrigPoly::constant(0.0),
        b: TrigPoly::sin(2.0, 1),
        phase_offset: offset,
        v_deriv_max: 0.0,
        b_deriv_max: 4.0 * PI,
        b_zeros: zeros,
        lambda: None,
    }
}

impl CoefficientFamily {
    pub fn v_at(&self, x: f64) -> f64 {
        self.v.eval(x + self.phase_offset)
    }

    pub fn b_at(&self, x: f64) -> f64 {
        self.b.eval(x + self.phase_offset)
    }

    pub fn v_deriv_at(&self, x: f64) -> f64 {
        self.v.deriv(x + self.phase_offset)
    }

    pub fn b_deriv_at(&self, x: f64) -> f64 {
        self.b.deriv(x + self.phase_offset)
    }

    /// Rate bound `sup|v'| + 2 sup|b'|` for eigenvalue motion in θ.
    pub fn motion_bound(&self) -> f64 {
        self.v_deriv_max + 2.0 * self.b_deriv_max
    }

    /// `sup|v''| + 2 sup|b''|`, bounding `‖∂²H/∂θ²‖`.
    pub fn curvature_bound(&self) -> f64 {
        self.v.second_deriv_bound() + 2.0 * self.b.second_deriv_bound()
    }

    pub fn is_amo(&self) -> bool {
        self.tag == FamilyTag::Amo
    }

    /// Falsification checks for the stated zeros and derivative bounds.
    pub fn validate(&self) -> Result<()> {
        const SAMPLES: usize = 8192;
        const DERIV_TOL: f64 = 1e-6;
        for &z in &self.b_zeros {
            let bz = self.b_at(z);
            if bz.abs() >= SINGULAR_THRESHOLD {
                return Err(Error::InvalidFamily(format!("b({z}) = {bz:e} is not a zero")));
            }
        }
        let eps = 1.0 / SAMPLES as f64;
        let near_zero = |x: f64| {
            self.b_zeros.iter().any(|&z| {
                let d = (x - z).rem_euclid(1.0);
                d.min(1.0 - d) <= 2.0 * eps
            })
        };
        let grid: Vec<f64> = (0..=SAMPLES).map(|i| i as f64 * eps).collect();
        let bvals: Vec<f64> = grid.iter().map(|&x| self.b_at(x)).collect();
        for i in 0..SAMPLES {
            let (x0, x1) = (grid[i], grid[i + 1]);
            if !near_zero(x0) && bvals[i].abs() < 1e-9 {
                return Err(Error::InvalidFamily(format!("b nearly vanishes at unlisted {x0}")));
            }
            if bvals[i].signum() != bvals[i + 1].signum() && !near_zero(x0) && !near_zero(x1) {
                return Err(Error::InvalidFamily(format!("b changes sign in [{x0}, {x1}] away from listed zeros")));
            }
        }
        for (name, f, bound) in [("v", &self.v, self.v_deriv_max), ("b", &self.b, self.b_deriv_max)] {
            let h = 1e-7;
            for &x in &grid {
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                if fd.abs() > bound + DERIV_TOL * (1.0 + bound) {
                    return Err(Error::InvalidFamily(format!(
                        "stated sup|{name}'| = {bound} but |{name}'({x})| ≈ {}",
                        fd.abs()
                    )));
                }
            }
            if (f.eval(0.37) - f.eval(1.37)).abs() > 1e-12 {
                return Err(Error::InvalidFamily(format!("{name} is not 1-periodic")));
            }
        }
        Ok(())
    }

    /// Zeros of `b` with `|b'(z)|` too small to be treated as simple.
    pub fn non_simple_zero(&self) -> Option<f64> {
        self.b_zeros.iter().copied().find(|&z| self.b_deriv_at(z).abs() < 1e-8)
    }
}

impl fmt::Display for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A frequency: either a reduced fraction or a floating-point real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Rational(Fraction),
    Real(f64),
}

impl Alpha {
    pub fn value(&self) -> f64 {
        match self {
            Alpha::Rational(f) => f.value(),
            Alpha::Real(x) => *x,
        }
    }

    /// `nα mod 1`, exact in the rational case.
    pub fn orbit(&self, n: i64) -> f64 {
        match self {
            Alpha::Rational(f) => {
                let q = f.q as i128;
                let r = ((n as i128) * (f.p as i128)).rem_euclid(q);
                r as f64 / q as f64
            }
            Alpha::Real(x) => (n as f64 * x).rem_euclid(1.0),
        }
    }
}

impl From<Fraction> for Alpha {
    fn from(f: Fraction) -> Self {
        Alpha::Rational(f)
    }
}

/// A family together with a frequency and a phase `θ ∈ [0, 1)`.
#[derive(Debug, Clone)]
pub struct SampledOperator<'a> {
    pub family: &'a CoefficientFamily,
    pub alpha: Alpha,
    pub theta: f64,
}

impl<'a> SampledOperator<'a> {
    pub fn new(family: &'a CoefficientFamily, alpha: impl Into<Alpha>, theta: f64) -> Self {
        SampledOperator { family, alpha: alpha.into(), theta: theta.rem_euclid(1.0) }
    }

    pub fn phase(&self, n: i64) -> f64 {
        self.theta + self.alpha.orbit(n)
    }

    pub fn v(&self, n: i64) -> f64 {
        self.family.v_at(self.phase(n))
    }

    pub fn b(&self, n: i64) -> f64 {
        self.family.b_at(self.phase(n))
    }
}

/// `(v_n)` and `(b_n)` for `n` in `range`.
pub fn sample_coeffs(op: &SampledOperator<'_>, range: std::ops::Range<i64>) -> (Vec<f64>, Vec<f64>) {
    range.map(|n| (op.v(n), op.b(n))).unzip()
}
