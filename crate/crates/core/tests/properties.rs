use harperlab_core::contfrac::{approximation_bounds_hold, cf_expand, convergents, convergents_from_coefficients};
use harperlab_core::dynamics::{lyapunov_numeric, transfer_product};
use harperlab_core::gauge::{PhaseExponent, Generator, BasisState};
use harperlab_core::model::{make_family, Alpha};
use harperlab_core::spectral::{floquet_matrix, fiber_spectrum, union_spectrum, CyclicJacobi, EigenPath, MERGE_TOL};
use harperlab_core::{BandSet, CfExpansion, DecimalReal, FamilyKind, Fraction, SampledOperator};
use num_rational::{BigRational, Rational64};
use proptest::prelude::*;

fn family(i: usize) -> harperlab_core::CoefficientFamily {
    let kind = match i {
        0 => FamilyKind::Amo { lambda: 1.0 },
        1 => FamilyKind::Amo { lambda: 0.6 },
        2 => FamilyKind::ChiralAmo,
        _ => FamilyKind::ShiftedChiralAmo { alpha: 0.3 },
    };
    make_family(kind).unwrap()
}

fn reduced() -> impl Strategy<Value = Fraction> {
    (2u64..40).prop_flat_map(|q| (1..q).prop_map(move |p| Fraction::new(p, q).unwrap()))
}

fn intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0f64..5.0, 0.0f64..1.0).prop_map(|(a, w)| (a, a + w)), 0..12)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn rationals_expand_back_to_themselves(p in 1u64..1_000_000, q in 2u64..1_000_000) {
        prop_assume!(p < q);
        let f = Fraction::new(p, q).unwrap();
        let x = DecimalReal::from_rational(f.to_big());
        // the expansion of a rational terminates; find its length
        let n = (1..64).take_while(|&n| cf_expand(&x, n).is_ok()).last().unwrap();
        let a = cf_expand(&x, n).unwrap();
        let last = convergents_from_coefficients(&a).pop().unwrap();
        prop_assert_eq!(last.fraction().unwrap(), f);
    }

    #[test]
    fn convergents_bracket_decimals(digits in "[0-9]{30}") {
        let s = format!("0.{digits}1");
        let x = DecimalReal::exact(&s).unwrap();
        let cf = CfExpansion::Real(x.clone());
        let Ok(cs) = convergents(&cf, 10) else { return Ok(()) };
        let numer: num_bigint::BigInt = s[2..].parse().unwrap();
        let value = BigRational::new(numer, num_bigint::BigInt::from(10u32).pow(s.len() as u32 - 2));
        for w in cs.windows(2) {
            prop_assert!(approximation_bounds_hold(&value, &w[0], &w[1]));
        }
    }

    #[test]
    fn coefficients_are_one_periodic(i in 0usize..4, x in -3.0f64..3.0) {
        let f = family(i);
        prop_assert!((f.v_at(x + 1.0) - f.v_at(x)).abs() < 1e-9);
        prop_assert!((f.b_at(x + 1.0) - f.b_at(x)).abs() < 1e-9);
    }

    #[test]
    fn rational_orbits_are_periodic(frac in reduced(), theta in 0.0f64..1.0, n in -50i64..50) {
        let f = family(0);
        let op = SampledOperator::new(&f, frac, theta);
        let q = frac.q as i64;
        prop_assert!((op.v(n + q) - op.v(n)).abs() < 1e-12);
        prop_assert!((op.b(n + q) - op.b(n)).abs() < 1e-12);
    }

    #[test]
    fn bandset_normalization_is_idempotent(raw in intervals()) {
        let a = BandSet::new(raw.clone(), MERGE_TOL);
        prop_assert!(a.is_normalized());
        let b = BandSet::new(a.intervals().iter().map(|iv| (iv[0], iv[1])), MERGE_TOL);
        prop_assert_eq!(&a, &b);
        let total: f64 = raw.iter().map(|(x, y)| y - x).sum();
        prop_assert!(a.measure() <= total + 1e-12);
        for (x, y) in raw {
            prop_assert!(a.contains(0.5 * (x + y), 0.0));
        }
    }

    #[test]
    fn union_is_commutative_and_covers(x in intervals(), y in intervals()) {
        let a = BandSet::new(x, MERGE_TOL);
        let b = BandSet::new(y, MERGE_TOL);
        let u = a.union(&b);
        prop_assert_eq!(&u, &b.union(&a));
        prop_assert!(a.is_subset_of(&u, 1e-12) && b.is_subset_of(&u, 1e-12));
        prop_assert!(u.measure() <= a.measure() + b.measure() + 1e-12);
    }

    #[test]
    fn phases_form_a_group(r1 in -20i64..20, s1 in -20i64..20, r2 in -20i64..20, d in 1i64..7) {
        let a = PhaseExponent::new(Rational64::new(r1, d), Rational64::new(s1, 2));
        let b = PhaseExponent::new(Rational64::new(r2, d), Rational64::new(-s1, 3));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a + (-a), PhaseExponent::zero());
        prop_assert!(a.r >= Rational64::from_integer(0) && a.r < Rational64::from_integer(1));
        // shifting r by an integer is invisible
        prop_assert_eq!(PhaseExponent::new(a.r + 3, a.s), a);
    }

    #[test]
    fn translations_invert(k in -30i64..30, m in -30i64..30) {
        let st = BasisState::new(k, m);
        let (ph1, mid) = Generator::T.apply(st).unwrap();
        let (ph2, back) = Generator::TInv.apply(mid).unwrap();
        prop_assert_eq!(back, st);
        prop_assert_eq!(ph1 + ph2, Rational64::from_integer(0));
    }

    #[test]
    fn bisection_agrees_with_dense(
        i in 0usize..4, frac in reduced(), theta in 0.0f64..1.0, k in 0.0f64..std::f64::consts::PI
    ) {
        let m = floquet_matrix(&family(i), frac, theta, k);
        let bis = m.eigenvalues_with(EigenPath::Bisection);
        let dense = m.eigenvalues_with(EigenPath::Dense);
        for (a, b) in bis.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn counts_are_monotone_in_energy(
        diag in prop::collection::vec(-2.0f64..2.0, 3..12), k in 0.0f64..3.2, e1 in -5.0f64..5.0, de in 0.0f64..3.0
    ) {
        let off: Vec<f64> = diag.iter().enumerate().map(|(n, _)| if n % 3 == 0 { 0.0 } else { 1.0 }).collect();
        let m = CyclicJacobi::new(diag, off, k);
        prop_assert!(m.count_below(e1) <= m.count_below(e1 + de));
    }

    #[test]
    fn transfer_determinants_telescope(i in 2usize..4, theta in 0.01f64..0.24, e in -3.0f64..3.0, n in 1usize..30) {
        let f = family(i);
        let alpha = Alpha::Real(0.618);
        let Ok(st) = transfer_product(&f, alpha, theta, e, n) else { return Ok(()) };
        let op = SampledOperator::new(&f, alpha, theta);
        let expect = op.b(-1) / op.b(n as i64 - 1);
        prop_assert!((st.det() - expect).abs() < 1e-8 * expect.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn fibers_lie_in_the_union(i in 0usize..4, p in 1u64..8, theta in 0.0f64..1.0) {
        let frac = Fraction::new(p, 8).unwrap();
        let union = union_spectrum(&family(i), frac, 1e-6).unwrap();
        let fiber = fiber_spectrum(&family(i), frac, theta);
        prop_assert!(fiber.is_subset_of(&union, 1e-9));
    }

    #[test]
    fn refinement_shrinks_the_union(i in 1usize..4, frac in reduced()) {
        prop_assume!(frac.q <= 13);
        let coarse = union_spectrum(&family(i), frac, 1e-2).unwrap();
        let fine = union_spectrum(&family(i), frac, 1e-6).unwrap();
        prop_assert!(fine.measure() <= coarse.measure() + 1e-6);
        prop_assert!(fine.is_subset_of(&coarse, 1e-9));
    }

    #[test]
    fn lyapunov_respects_the_herman_bound(lambda in 1.2f64..3.0, e in -4.0f64..4.0) {
        let f = make_family(FamilyKind::Amo { lambda }).unwrap();
        let est = lyapunov_numeric(&f, Alpha::Real(0.618_033_988_749_895), e, 2000, 10, 1).unwrap();
        prop_assert!(est.lyapunov >= lambda.ln() - 5.0 * est.stderr - 2e-3, "{est:?}");
    }
}
