//! Exact phase-monomial calculus for the chiral gauge transform.
//!
//! Operators act on the Fourier basis `e_{k,m}(n, θ) = δ_{n,k} e^{2πimθ}` with
//! `k ∈ ℤ`, `m ∈ ½ℤ`. Every generator maps a basis element to a unimodular
//! multiple of another basis element, so words in the generators can be
//! evaluated exactly and relations between words checked state by state.
//!
//! | generator | state               | phase exponent |
//! |-----------|---------------------|----------------|
//! | `T`       | `(k−1, m)`          | 0              |
//! | `T⁻¹`     | `(k+1, m)`          | 0              |
//! | `S^x`     | `(k, m+x)`          | `x k α`        |
//! | `U_x`     | `(k, m+xk)`         | `x k² α / 2`   |
//! | `R`       | `(m, −k)`, m ∈ ℤ    | `−k m α`       |
//!
//! and `Q = U₁ R U_{1/2}`.

use std::fmt;
use std::ops::{Add, Neg};
use std::ops::RangeInclusive;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::contfrac::Fraction;
use crate::error::{Error, Result};
use crate::model::{make_family, FamilyKind};
use crate::spectral::{ids, union_spectrum, BandSet, IdsSample};

/// The phase `exp(2πi(r + sα))`, with `r` kept in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseExponent {
    pub r: Rational64,
    pub s: Rational64,
}

fn frac_part(x: Rational64) -> Rational64 {
    x - x.floor()
}

impl PhaseExponent {
    pub fn new(r: Rational64, s: Rational64) -> Self {
        PhaseExponent { r: frac_part(r), s }
    }

    pub fn zero() -> Self {
        PhaseExponent { r: Rational64::zero(), s: Rational64::zero() }
    }

    /// `exp(2πi s α)`.
    pub fn alpha(s: Rational64) -> Self {
        PhaseExponent::new(Rational64::zero(), s)
    }

    /// `(r + s p/q) mod 1`.
    pub fn specialize(&self, alpha: Fraction) -> Rational64 {
        frac_part(self.r + self.s * Rational64::new(alpha.p as i64, alpha.q as i64))
    }
}

impl Add for PhaseExponent {
    type Output = PhaseExponent;
    fn add(self, o: PhaseExponent) -> PhaseExponent {
        PhaseExponent::new(self.r + o.r, self.s + o.s)
    }
}

impl Neg for PhaseExponent {
    type Output = PhaseExponent;
    fn neg(self) -> PhaseExponent {
        PhaseExponent::new(-self.r, -self.s)
    }
}

impl fmt::Display for PhaseExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(2πi({} + {}α))", self.r, self.s)
    }
}

/// `e_{k,m}` with `m2 = 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasisState {
    pub k: i64,
    pub m2: i64,
}

impl BasisState {
    pub fn new(k: i64, m: i64) -> Self {
        BasisState { k, m2: 2 * m }
    }

    pub fn half(k: i64, m2: i64) -> Self {
        BasisState { k, m2 }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m2 % 2 == 0 {
            write!(f, "({}, {})", self.k, self.m2 / 2)
        } else {
            write!(f, "({}, {}/2)", self.k, self.m2)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    T,
    TInv,
    /// `S^x`, `x ∈ ½ℤ` stored doubled.
    S { x2: i64 },
    /// `U_x`, `x ∈ ½ℤ` stored doubled.
    U { x2: i64 },
    R,
}

impl Generator {
    pub fn s(x: Rational64) -> Self {
        Generator::S { x2: doubled(x) }
    }

    pub fn u(x: Rational64) -> Self {
        Generator::U { x2: doubled(x) }
    }

    pub fn apply(self, st: BasisState) -> Result<(Rational64, BasisState)> {
        let BasisState { k, m2 } = st;
        Ok(match self {
            Generator::T => (Rational64::zero(), BasisState { k: k - 1, m2 }),
            Generator::TInv => (Rational64::zero(), BasisState { k: k + 1, m2 }),
            Generator::S { x2 } => (Rational64::new(x2 * k, 2), BasisState { k, m2: m2 + x2 }),
            Generator::U { x2 } => (Rational64::new(x2 * k * k, 4), BasisState { k, m2: m2 + x2 * k }),
            Generator::R => {
                if m2.is_odd() {
                    return Err(Error::HalfIntegerMode { k, m2 });
                }
                let m = m2 / 2;
                (Rational64::from_integer(-k * m), BasisState { k: m, m2: -2 * k })
            }
        })
    }
}

fn doubled(x: Rational64) -> i64 {
    let d = x * 2;
    assert!(d.is_integer(), "exponent {x} is not a half-integer");
    d.to_integer()
}

fn half_str(x2: i64) -> String {
    if x2 % 2 == 0 { format!("{}", x2 / 2) } else { format!("{x2}/2") }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::T => f.write_str("T"),
            Generator::TInv => f.write_str("T^-1"),
            Generator::S { x2: 2 } => f.write_str("S"),
            Generator::S { x2: -2 } => f.write_str("S^-1"),
            Generator::S { x2 } => write!(f, "S^{}", half_str(*x2)),
            Generator::U { x2 } => write!(f, "U_{}", half_str(*x2)),
            Generator::R => f.write_str("R"),
        }
    }
}

/// `Q = U₁ R U_{1/2}` as a generator word.
pub fn q_word() -> Vec<Generator> {
    vec![Generator::U { x2: 2 }, Generator::R, Generator::U { x2: 1 }]
}

/// `prefactor · g_1 g_2 ⋯ g_n`, applied right to left.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialOp {
    pub prefactor: PhaseExponent,
    pub word: Vec<Generator>,
}

impl MonomialOp {
    pub fn new(word: Vec<Generator>) -> Self {
        MonomialOp { prefactor: PhaseExponent::zero(), word }
    }

    /// Multiplies by `exp(2πi s α)`.
    pub fn with_alpha_phase(mut self, s: Rational64) -> Self {
        self.prefactor = self.prefactor + PhaseExponent::alpha(s);
        self
    }
}

impl fmt::Display for MonomialOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefactor != PhaseExponent::zero() {
            write!(f, "{} ", self.prefactor)?;
        }
        let w: Vec<String> = self.word.iter().map(|g| g.to_string()).collect();
        f.write_str(&w.join(" "))
    }
}

pub fn apply_word(op: &MonomialOp, state: BasisState) -> Result<(PhaseExponent, BasisState)> {
    let mut st = state;
    let mut s = Rational64::zero();
    for g in op.word.iter().rev() {
        let (ds, next) = g.apply(st)?;
        s += ds;
        st = next;
    }
    Ok((op.prefactor + PhaseExponent::alpha(s), st))
}

/// How phases are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AlphaSpec {
    /// `(r, s)` pairs compared exactly: the identity holds for every α.
    Symbolic,
    Rational(Fraction),
}

impl AlphaSpec {
    fn key(&self, p: PhaseExponent) -> (Rational64, Rational64) {
        match self {
            AlphaSpec::Symbolic => (p.r, p.s),
            AlphaSpec::Rational(a) => (p.specialize(*a), Rational64::zero()),
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Symbolic => f.write_str("symbolic"),
            AlphaSpec::Rational(a) => write!(f, "{a}"),
        }
    }
}

impl std::str::FromStr for AlphaSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "symbolic" { Ok(AlphaSpec::Symbolic) } else { Ok(AlphaSpec::Rational(s.parse()?)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub state: BasisState,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// Every state was outside the domain of `R`.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub name: String,
    pub alpha: String,
    pub checked: usize,
    pub skipped: usize,
    pub failed: usize,
    /// The first few failing states.
    pub witnesses: Vec<Witness>,
    pub skipped_states: Vec<BasisState>,
}

impl RelationReport {
    pub fn verdict(&self) -> Verdict {
        if self.failed > 0 {
            Verdict::Fail
        } else if self.checked == 0 {
            Verdict::Vacuous
        } else {
            Verdict::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict() == Verdict::Pass
    }
}

const MAX_WITNESSES: usize = 8;

enum Outcome {
    Equal,
    Skipped,
    Differs(String, String),
}

fn states(k_range: &RangeInclusive<i64>, m_range: &RangeInclusive<i64>) -> Vec<BasisState> {
    k_range.clone().flat_map(|k| m_range.clone().map(move |m| BasisState::new(k, m))).collect()
}

fn collect(name: &str, alpha: AlphaSpec, outcomes: Vec<(BasisState, Outcome)>) -> RelationReport {
    let mut r = RelationReport {
        name: name.to_string(),
        alpha: alpha.to_string(),
        checked: 0,
        skipped: 0,
        failed: 0,
        witnesses: Vec::new(),
        skipped_states: Vec::new(),
    };
    for (st, o) in outcomes {
        match o {
            Outcome::Equal => r.checked += 1,
            Outcome::Skipped => {
                r.skipped += 1;
                r.skipped_states.push(st);
            }
            Outcome::Differs(lhs, rhs) => {
                r.checked += 1;
                r.failed += 1;
                if r.witnesses.len() < MAX_WITNESSES {
                    r.witnesses.push(Witness { state: st, lhs, rhs });
                }
            }
        }
    }
    r
}

/// Checks `lhs = rhs` on every integer-mode state of the grid.
pub fn verify_relation(
    name: &str,
    lhs: &MonomialOp,
    rhs: &MonomialOp,
    k_range: RangeInclusive<i64>,
    m_range: RangeInclusive<i64>,
    alpha: AlphaSpec,
) -> RelationReport {
    let outcomes = states(&k_range, &m_range)
        .into_par_iter()
        .map(|st| {
            let o = match (apply_word(lhs, st), apply_word(rhs, st)) {
                (Ok((pl, sl)), Ok((pr, sr))) => {
                    if sl == sr && alpha.key(pl) == alpha.key(pr) {
                        Outcome::Equal
                    } else {
                        Outcome::Differs(format!("{pl} e{sl}"), format!("{pr} e{sr}"))
                    }
                }
                _ => Outcome::Skipped,
            };
            (st, o)
        })
        .collect();
    collect(name, alpha, outcomes)
}

/// `Q(T² + T⁻² + S + S⁻¹) = (e^{iπα}[ST + S⁻¹T⁻¹] + e^{−iπα}[ST⁻¹ + S⁻¹T])Q`,
/// compared as multisets of `(phase, state)` on every state.
pub fn verify_conjugation(
    k_range: RangeInclusive<i64>,
    m_range: RangeInclusive<i64>,
    alpha: AlphaSpec,
) -> RelationReport {
    verify_conjugation_with(&q_word(), k_range, m_range, alpha)
}

/// As [`verify_conjugation`] with `Q` replaced by an arbitrary word.
pub fn verify_conjugation_with(
    q: &[Generator],
    k_range: RangeInclusive<i64>,
    m_range: RangeInclusive<i64>,
    alpha: AlphaSpec,
) -> RelationReport {
    use Generator::*;
    let half = Rational64::new(1, 2);
    let with_q_left = |w: &[Generator]| [q, w].concat();
    let with_q_right = |w: &[Generator]| [w, q].concat();
    let lhs: Vec<MonomialOp> = [vec![T, T], vec![TInv, TInv], vec![S { x2: 2 }], vec![S { x2: -2 }]]
        .iter()
        .map(|w| MonomialOp::new(with_q_left(w)))
        .collect();
    let rhs: Vec<MonomialOp> = vec![
        MonomialOp::new(with_q_right(&[S { x2: 2 }, T])).with_alpha_phase(half),
        MonomialOp::new(with_q_right(&[S { x2: -2 }, TInv])).with_alpha_phase(half),
        MonomialOp::new(with_q_right(&[S { x2: 2 }, TInv])).with_alpha_phase(-half),
        MonomialOp::new(with_q_right(&[S { x2: -2 }, T])).with_alpha_phase(-half),
    ];
    let outcomes = states(&k_range, &m_range)
        .into_par_iter()
        .map(|st| {
            let side = |ops: &[MonomialOp]| -> Result<Vec<((Rational64, Rational64), BasisState)>> {
                let mut v = ops
                    .iter()
                    .map(|op| apply_word(op, st).map(|(p, s)| (alpha.key(p), s)))
                    .collect::<Result<Vec<_>>>()?;
                v.sort();
                Ok(v)
            };
            let o = match (side(&lhs), side(&rhs)) {
                (Ok(a), Ok(b)) if a == b => Outcome::Equal,
                (Ok(a), Ok(b)) => Outcome::Differs(format!("{a:?}"), format!("{b:?}")),
                _ => Outcome::Skipped,
            };
            (st, o)
        })
        .collect();
    collect("conjugation", alpha, outcomes)
}

/// A named relation `lhs = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedRelation {
    pub name: String,
    pub lhs: MonomialOp,
    pub rhs: MonomialOp,
    /// Involves `Q`, so only even `k` stay on integer modes.
    pub uses_q: bool,
}

fn rel(name: impl Into<String>, lhs: MonomialOp, rhs: MonomialOp, uses_q: bool) -> NamedRelation {
    NamedRelation { name: name.into(), lhs, rhs, uses_q }
}

/// All relations used by the chiral gauge argument.
pub fn relation_catalogue() -> Vec<NamedRelation> {
    use Generator::*;
    let r = |x: i64, y: i64| Rational64::new(x, y);
    let m = MonomialOp::new;
    let s1 = S { x2: 2 };
    let s_inv = S { x2: -2 };
    let mut out = vec![
        rel("RS", m(vec![R, s1]), m(vec![TInv, R]), false),
        rel("RS^-1", m(vec![R, s_inv]), m(vec![T, R]), false),
        rel("RT", m(vec![R, T]), m(vec![s1, R]), false),
        rel("RT^-1", m(vec![R, TInv]), m(vec![s_inv, R]), false),
    ];
    for x2 in [1i64, 2] {
        let x = r(x2, 2);
        let xs = half_str(x2);
        let u = U { x2 };
        out.push(rel(format!("TU_{xs}"), m(vec![T, u]), m(vec![S { x2 }, u, T]).with_alpha_phase(x / 2), false));
        out.push(rel(format!("U_{xs}T"), m(vec![u, T]), m(vec![S { x2: -x2 }, T, u]).with_alpha_phase(-x / 2), false));
        out.push(rel(
            format!("U_{xs}T^-1"),
            m(vec![u, TInv]),
            m(vec![S { x2 }, TInv, u]).with_alpha_phase(-x / 2),
            false,
        ));
        out.push(rel(format!("S^{xs}T"), m(vec![S { x2 }, T]), m(vec![T, S { x2 }]).with_alpha_phase(-x), false));
        out.push(rel(
            format!("T^-1S^-{xs}"),
            m(vec![TInv, S { x2: -x2 }]),
            m(vec![S { x2: -x2 }, TInv]).with_alpha_phase(x),
            false,
        ));
        for y2 in [1i64, 2, -2] {
            out.push(rel(
                format!("U_{xs}S^{}", half_str(y2)),
                m(vec![u, S { x2: y2 }]),
                m(vec![S { x2: y2 }, u]),
                false,
            ));
        }
    }
    let q = q_word();
    let with_q = |w: &[Generator]| [q.as_slice(), w].concat();
    let then_q = |w: &[Generator]| [w, q.as_slice()].concat();
    let h = r(1, 2);
    out.push(rel("QS", m(with_q(&[s1])), m(then_q(&[s1, TInv])).with_alpha_phase(-h), true));
    out.push(rel("QS^-1", m(with_q(&[s_inv])), m(then_q(&[s_inv, T])).with_alpha_phase(-h), true));
    out.push(rel("QT^2", m(with_q(&[T, T])), m(then_q(&[s1, T])).with_alpha_phase(h), true));
    out.push(rel("QT^-2", m(with_q(&[TInv, TInv])), m(then_q(&[s_inv, TInv])).with_alpha_phase(h), true));
    out
}

/// Runs the whole catalogue plus the conjugation identity for one α.
pub fn verify_all(k: i64, m: i64, alpha: AlphaSpec) -> Vec<RelationReport> {
    let mut out: Vec<RelationReport> = relation_catalogue()
        .iter()
        .map(|nr| verify_relation(&nr.name, &nr.lhs, &nr.rhs, -k..=k, -m..=m, alpha))
        .collect();
    out.push(verify_conjugation(-k..=k, -m..=m, alpha));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsospectralReport {
    pub fraction: Fraction,
    /// `2p/q` reduced into `[0, 1)`.
    pub doubled: Fraction,
    pub tol: f64,
    pub amo: BandSet,
    pub chiral: BandSet,
    pub distance: f64,
}

impl IsospectralReport {
    pub fn passed(&self) -> bool {
        self.distance <= 2.0 * self.tol
    }
}

/// Compares `σ(M_{2p/q})` for `amo(1)` with `σ(M̃_{p/q})` for the shifted
/// chiral family.
pub fn isospectral_check(frac: Fraction, tol: f64) -> Result<IsospectralReport> {
    let frac = Fraction::new(frac.p, frac.q)?;
    let doubled = frac.doubled().mod_one();
    let amo = union_spectrum(&make_family(FamilyKind::Amo { lambda: 1.0 })?, doubled, tol)?;
    let chiral_family = make_family(FamilyKind::ShiftedChiralAmo { alpha: frac.value() })?;
    let chiral = union_spectrum(&chiral_family, frac, tol)?;
    let distance = amo.hausdorff_distance(&chiral)?;
    Ok(IsospectralReport { fraction: frac, doubled, tol, amo, chiral, distance })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdsEqualityReport {
    pub fraction: Fraction,
    pub doubled: Fraction,
    pub sup_deviation: f64,
    /// Energy where the deviation is largest.
    pub worst_energy: f64,
    pub amo: IdsSample,
    pub chiral: IdsSample,
}

/// `sup_E |N_{2p/q}(E) − Ñ_{p/q}(E)|` on `grid`.
pub fn ids_equality_check(
    frac: Fraction,
    grid: &[f64],
    theta_samples: usize,
    k_samples: usize,
) -> Result<IdsEqualityReport> {
    if grid.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let frac = Fraction::new(frac.p, frac.q)?;
    let doubled = frac.doubled().mod_one();
    let amo = ids(&make_family(FamilyKind::Amo { lambda: 1.0 })?, doubled, grid, theta_samples, k_samples)?;
    let chiral_family = make_family(FamilyKind::ShiftedChiralAmo { alpha: frac.value() })?;
    let chiral = ids(&chiral_family, frac, grid, theta_samples, k_samples)?;
    let (mut sup, mut worst) = (0.0f64, grid[0]);
    for (i, e) in grid.iter().enumerate() {
        let d = (amo.values[i] - chiral.values[i]).abs();
        if d > sup {
            sup = d;
            worst = *e;
        }
    }
    Ok(IdsEqualityReport { fraction: frac, doubled, sup_deviation: sup, worst_energy: worst, amo, chiral })
}

/// `exp(2πi s α)` with `s = 1`.
pub fn alpha_unit() -> PhaseExponent {
    PhaseExponent::alpha(Rational64::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Generator::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn generator_examples() {
        let (p, s) = apply_word(&MonomialOp::new(vec![R]), BasisState::new(1, 1)).unwrap();
        assert_eq!((p, s), (PhaseExponent::alpha(r(-1, 1)), BasisState::new(1, -1)));
        let (p, s) = apply_word(&MonomialOp::new(vec![S { x2: 2 }]), BasisState::new(3, 5)).unwrap();
        assert_eq!((p, s), (PhaseExponent::alpha(r(3, 1)), BasisState::new(3, 6)));
        let (p, s) = apply_word(&MonomialOp::new(vec![U { x2: 1 }]), BasisState::new(2, 0)).unwrap();
        assert_eq!((p, s), (alpha_unit(), BasisState::new(2, 1)));
    }

    #[test]
    fn r_rejects_half_modes() {
        let err = apply_word(&MonomialOp::new(vec![R]), BasisState::half(1, 1)).unwrap_err();
        assert_eq!(err, Error::HalfIntegerMode { k: 1, m2: 1 });
    }

    #[test]
    fn q_on_even_sites() {
        // Q(k, m) = (m + k/2, m − k/2) with exponent −k²/8 − km/2 + m²/2
        for k in (-6..=6).step_by(2) {
            for m in -4..=4 {
                let (p, s) = apply_word(&MonomialOp::new(q_word()), BasisState::new(k, m)).unwrap();
                assert_eq!(s, BasisState::new(m + k / 2, m - k / 2));
                assert_eq!(p.s, r(-k * k, 8) - r(k * m, 2) + r(m * m, 2));
            }
        }
    }

    #[test]
    fn phase_arithmetic() {
        let a = PhaseExponent::new(r(5, 4), r(1, 3));
        assert_eq!(a.r, r(1, 4));
        assert_eq!((a + -a), PhaseExponent::zero());
        let half = Fraction::new(1, 2).unwrap();
        assert_eq!(PhaseExponent::alpha(r(2, 1)).specialize(half), r(0, 1));
    }

    #[test]
    fn catalogue_passes() {
        for nr in relation_catalogue() {
            let rep = verify_relation(&nr.name, &nr.lhs, &nr.rhs, -6..=6, -6..=6, AlphaSpec::Symbolic);
            assert!(rep.passed(), "{}: {:?}", nr.name, rep.witnesses);
            if nr.uses_q {
                assert!(rep.skipped > 0 && rep.skipped_states.iter().all(|s| s.k % 2 != 0));
            } else {
                assert_eq!(rep.skipped, 0, "{}", nr.name);
            }
        }
    }

    #[test]
    fn single_term_conjugation() {
        let lhs = MonomialOp::new([q_word(), vec![T, T]].concat());
        let rhs = MonomialOp::new([vec![S { x2: 2 }, T], q_word()].concat()).with_alpha_phase(r(1, 2));
        assert_eq!(apply_word(&lhs, BasisState::new(2, 0)).unwrap(), apply_word(&rhs, BasisState::new(2, 0)).unwrap());
    }

    #[test]
    fn mutations_fail() {
        let wrong = MonomialOp::new([vec![S { x2: 2 }, TInv], q_word()].concat()).with_alpha_phase(r(1, 2));
        let lhs = MonomialOp::new([q_word(), vec![S { x2: 2 }]].concat());
        let rep = verify_relation("QS-mutant", &lhs, &wrong, -4..=4, -4..=4, AlphaSpec::Symbolic);
        assert_eq!(rep.verdict(), Verdict::Fail);
        assert!(!rep.witnesses.is_empty());
        let bad_q = vec![U { x2: 1 }, R, U { x2: 1 }];
        let rep = verify_conjugation_with(&bad_q, -4..=4, -4..=4, AlphaSpec::Symbolic);
        assert_eq!(rep.verdict(), Verdict::Fail);
    }

    #[test]
    fn specialized_alpha_is_weaker_but_passes() {
        let a = AlphaSpec::Rational(Fraction::new(2, 5).unwrap());
        let rep = verify_conjugation(-4..=4, -4..=4, a);
        assert!(rep.passed());
    }
}
