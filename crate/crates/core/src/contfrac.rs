//! Continued fractions and canonical approximants.
//!
//! Real numbers enter either as named coefficient streams (golden and silver
//! means) or as decimal strings with an explicit precision. Decimal inputs are
//! expanded on an interval enclosure `[x - r, x + r]` in exact rational
//! arithmetic; a coefficient is emitted only when both ends of the enclosure
//! agree on it.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reduced fraction `p/q` used as a rational frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub p: u64,
    pub q: u64,
}

impl Fraction {
    /// Builds `p/q` in lowest terms. `q` must be positive.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("fraction with zero denominator".into()));
        }
        let g = p.gcd(&q);
        Ok(Fraction { p: p / g, q: q / g })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `p/q -> 2p/q` in lowest terms. The result is not reduced mod 1.
    pub fn doubled(&self) -> Fraction {
        Fraction::new(2 * self.p, self.q).expect("nonzero denominator")
    }

    /// Representative of the same frequency in `[0, 1)`.
    pub fn mod_one(&self) -> Fraction {
        Fraction { p: self.p % self.q, q: self.q }
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidInput(format!("expected p/q, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidInput(format!("bad fraction {s:?}: {e}")))
        };
        Fraction::new(parse(p)?, parse(q)?)
    }
}

/// A real number in `(0, 1)` known up to an absolute radius.
#[derive(Debug, Clone, PartialEq)]
pub struct DecimalReal {
    pub center: BigRational,
    pub radius: BigRational,
}

impl DecimalReal {
    /// Parses a decimal string and treats it as an exact rational.
    pub fn exact(s: &str) -> Result<Self> {
        Ok(DecimalReal { center: parse_decimal(s)?, radius: BigRational::zero() })
    }

    /// Parses a decimal string accurate to `digits` decimal places, i.e. with
    /// enclosure radius `10^-digits / 2`.
    pub fn with_digits(s: &str, digits: u32) -> Result<Self> {
        let center = parse_decimal(s)?;
        let radius = BigRational::new(BigInt::one(), BigInt::from(2u32) * BigInt::from(10u32).pow(digits));
        Ok(DecimalReal { center, radius })
    }

    pub fn from_rational(x: BigRational) -> Self {
        DecimalReal { center: x, radius: BigRational::zero() }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.center)
    }
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a decimal number: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}

pub(crate) fn ratio_to_f64(x: &BigRational) -> f64 {
    // Scale to keep both parts representable.
    let n = x.numer();
    let d = x.denom();
    let shift = (d.bits().max(n.bits()) as i64 - 60).max(0);
    let n2: BigInt = n >> (shift as usize);
    let d2: BigInt = d >> (shift as usize);
    match (n2.to_f64(), d2.to_f64()) {
        (Some(a), Some(b)) if b != 0.0 => a / b,
        _ => n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN),
    }
}

/// Source of continued-fraction coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum CfExpansion {
    /// `(√5 − 1)/2 = [0; 1, 1, 1, ...]`.
    Golden,
    /// `√2 − 1 = [0; 2, 2, 2, ...]`.
    Silver,
    /// A finite explicit list `a_1, a_2, ...`; asking for more is an error.
    Explicit(Vec<u64>),
    /// A decimal real expanded on its enclosure.
    Real(DecimalReal),
}

impl CfExpansion {
    pub fn coefficients(&self, count: usize) -> Result<Vec<u64>> {
        if count == 0 {
            return Err(Error::InvalidInput("count must be at least 1".into()));
        }
        match self {
            CfExpansion::Golden => Ok(vec![1; count]),
            CfExpansion::Silver => Ok(vec![2; count]),
            CfExpansion::Explicit(a) => {
                if let Some(bad) = a.iter().position(|&x| x == 0) {
                    return Err(Error::InvalidInput(format!("coefficient a_{} is zero", bad + 1)));
                }
                if a.len() < count {
                    return Err(Error::PrecisionExhausted { depth: a.len() + 1 });
                }
                Ok(a[..count].to_vec())
            }
            CfExpansion::Real(x) => cf_expand(x, count),
        }
    }

    /// Floating-point value of the expanded number.
    pub fn value_f64(&self) -> f64 {
        match self {
            CfExpansion::Golden => (5f64.sqrt() - 1.0) / 2.0,
            CfExpansion::Silver => 2f64.sqrt() - 1.0,
            CfExpansion::Explicit(a) => {
                a.iter().rev().fold(0.0, |acc, &ai| 1.0 / (ai as f64 + acc))
            }
            CfExpansion::Real(x) => x.to_f64(),
        }
    }
}

impl FromStr for CfExpansion {
    type Err = Error;

    /// `golden`, `silver`, `p/q` (exact) or a decimal string (exact).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "golden" => Ok(CfExpansion::Golden),
            "silver" => Ok(CfExpansion::Silver),
            t if t.contains('/') => {
                let f: Fraction = t.parse()?;
                Ok(CfExpansion::Real(DecimalReal::from_rational(f.to_big())))
            }
            t => Ok(CfExpansion::Real(DecimalReal::exact(t)?)),
        }
    }
}

/// First `count` coefficients `a_1..a_count` of `x ∈ (0, 1)`.
pub fn cf_expand(x: &DecimalReal, count: usize) -> Result<Vec<u64>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let mut lo = &x.center - &x.radius;
    let mut hi = &x.center + &x.radius;
    if !x.center.is_positive() || x.center >= BigRational::one() || x.radius.is_negative() {
        return Err(Error::InvalidInput("x must lie in (0, 1)".into()));
    }
    if !lo.is_positive() || hi >= BigRational::one() {
        return Err(Error::PrecisionExhausted { depth: 1 });
    }
    let mut out = Vec::with_capacity(count);
    for depth in 1..=count {
        if !lo.is_positive() {
            return Err(Error::PrecisionExhausted { depth });
        }
        let inv_lo = hi.recip();
        let inv_hi = lo.recip();
        let a_lo = inv_lo.floor();
        let a_hi = inv_hi.floor();
        if a_lo != a_hi {
            return Err(Error::PrecisionExhausted { depth });
        }
        let a = a_lo
            .to_integer()
            .to_u64()
            .ok_or(Error::PrecisionExhausted { depth })?;
        out.push(a);
        lo = inv_lo - &a_lo;
        hi = inv_hi - &a_hi;
    }
    Ok(out)
}

/// One canonical approximant `p_n/q_n` of a continued fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergent {
    pub n: usize,
    pub p: BigUint,
    pub q: BigUint,
    /// The coefficient `a_n`.
    pub a: u64,
    /// `1/(q_n q_{n+1})`, known when the next convergent has been computed.
    pub omega: Option<BigRational>,
}

impl Convergent {
    pub fn fraction(&self) -> Option<Fraction> {
        Some(Fraction { p: self.p.to_u64()?, q: self.q.to_u64()? })
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }

    pub fn omega_f64(&self) -> Option<f64> {
        self.omega.as_ref().map(ratio_to_f64)
    }
}

/// Canonical approximants `p_1/q_1 .. p_count/q_count`.
pub fn convergents(cf: &CfExpansion, count: usize) -> Result<Vec<Convergent>> {
    let a = cf.coefficients(count)?;
    Ok(convergents_from_coefficients(&a))
}

pub fn convergents_from_coefficients(a: &[u64]) -> Vec<Convergent> {
    let (mut p_prev, mut p) = (BigUint::one(), BigUint::zero());
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    let mut out: Vec<Convergent> = Vec::with_capacity(a.len());
    for (i, &ai) in a.iter().enumerate() {
        let p_next = BigUint::from(ai) * &p + &p_prev;
        let q_next = BigUint::from(ai) * &q + &q_prev;
        if let Some(last) = out.last_mut() {
            last.omega = Some(BigRational::new(
                BigInt::one(),
                BigInt::from(last.q.clone() * &q_next),
            ));
        }
        out.push(Convergent { n: i + 1, p: p_next.clone(), q: q_next.clone(), a: ai, omega: None });
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    out
}

/// Canonical approximants with `q_n <= q_max`, for streams that never run dry
/// before `q_max` is reached.
pub fn convergents_up_to(cf: &CfExpansion, q_max: u64) -> Result<Vec<Convergent>> {
    let mut count = 8;
    loop {
        let cs = convergents(cf, count)?;
        let limit = BigUint::from(q_max);
        if cs.last().map(|c| c.q > limit).unwrap_or(false) {
            return Ok(cs.into_iter().filter(|c| c.q <= limit).collect());
        }
        count *= 2;
        if count > 4096 {
            return Err(Error::InvalidInput("q_max not reached".into()));
        }
    }
}

/// Checks `1/(q_n(q_n+q_{n+1})) < |x − p_n/q_n| < 1/(q_n q_{n+1})` exactly.
pub fn approximation_bounds_hold(x: &BigRational, c: &Convergent, next: &Convergent) -> bool {
    let qn = BigInt::from(c.q.clone());
    let qn1 = BigInt::from(next.q.clone());
    let err = (x - c.value()).abs();
    let lower = BigRational::new(BigInt::one(), &qn * (&qn + &qn1));
    let upper = BigRational::new(BigInt::one(), &qn * &qn1);
    let weakest = BigRational::new(BigInt::one(), &qn * &qn);
    lower < err && err < upper && upper < weakest
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(cs: &[Convergent]) -> Vec<(u64, u64)> {
        cs.iter().map(|c| (c.p.to_u64().unwrap(), c.q.to_u64().unwrap())).collect()
    }

    #[test]
    fn golden_and_silver_streams() {
        assert_eq!(CfExpansion::Golden.coefficients(6).unwrap(), vec![1; 6]);
        assert_eq!(CfExpansion::Silver.coefficients(4).unwrap(), vec![2; 4]);
    }

    #[test]
    fn decimal_expansions_match_named_streams() {
        let g = DecimalReal::with_digits("0.6180339887498948482045868343656381177203", 40).unwrap();
        assert_eq!(cf_expand(&g, 6).unwrap(), vec![1; 6]);
        let s = DecimalReal::with_digits("0.41421356237309504880168872420969807856967", 41).unwrap();
        assert_eq!(cf_expand(&s, 4).unwrap(), vec![2; 4]);
    }

    #[test]
    fn rational_input_terminates() {
        // 3/10 = [0; 3, 3]
        let x = DecimalReal::exact("0.3").unwrap();
        assert_eq!(cf_expand(&x, 2).unwrap(), vec![3, 3]);
        assert_eq!(cf_expand(&x, 3), Err(Error::PrecisionExhausted { depth: 3 }));
        assert_eq!(cf_expand(&x, 4), Err(Error::PrecisionExhausted { depth: 3 }));
    }

    #[test]
    fn short_precision_runs_out() {
        let g = DecimalReal::with_digits("0.618034", 6).unwrap();
        let err = cf_expand(&g, 40).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { depth } if depth > 5 && depth < 20));
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(cf_expand(&DecimalReal::exact("1.5").unwrap(), 1).is_err());
        assert!(cf_expand(&DecimalReal::exact("0").unwrap(), 1).is_err());
    }

    #[test]
    fn fibonacci_and_pell_convergents() {
        let g = convergents(&CfExpansion::Golden, 6).unwrap();
        assert_eq!(qs(&g), vec![(1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]);
        assert!(g[..5].iter().all(|c| c.omega.is_some()));
        assert!(g[5].omega.is_none());
        assert_eq!(g[2].omega_f64().unwrap(), 1.0 / 15.0);
        let s = convergents(&CfExpansion::Silver, 3).unwrap();
        assert_eq!(qs(&s), vec![(1, 2), (2, 5), (5, 12)]);
    }

    #[test]
    fn convergents_up_to_q() {
        let g = convergents_up_to(&CfExpansion::Golden, 610).unwrap();
        assert_eq!(g.last().unwrap().q.to_u64(), Some(610));
        assert_eq!(g.len(), 14);
    }

    #[test]
    fn fraction_doubling_reduces() {
        assert_eq!(Fraction::new(1, 6).unwrap().doubled(), Fraction { p: 1, q: 3 });
        assert_eq!(Fraction::new(3, 8).unwrap().doubled(), Fraction { p: 3, q: 4 });
        assert_eq!(Fraction::new(2, 3).unwrap().doubled(), Fraction { p: 4, q: 3 });
        assert_eq!(Fraction::new(4, 3).unwrap().mod_one(), Fraction { p: 1, q: 3 });
        assert_eq!("6/8".parse::<Fraction>().unwrap(), Fraction { p: 3, q: 4 });
        assert!("1/0".parse::<Fraction>().is_err());
    }

    #[test]
    fn parse_expansion_sources() {
        assert_eq!("golden".parse::<CfExpansion>().unwrap(), CfExpansion::Golden);
        let r: CfExpansion = "2/5".parse().unwrap();
        assert_eq!(r.coefficients(2).unwrap(), vec![2, 2]);
        assert!((CfExpansion::Explicit(vec![2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2]).value_f64()
            - (2f64.sqrt() - 1.0))
            .abs()
            < 1e-9);
    }
}
