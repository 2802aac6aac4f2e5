use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use octak::field::{gaussian_prime_over, pythag_factor, Element, FieldDescriptor, UnitElement};
use octak::Error;
use proptest::prelude::*;

const PRIMES_1_MOD_4: [i64; 11] = [5, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97];

fn fields() -> Vec<FieldDescriptor> {
    vec![
        FieldDescriptor::Rationals,
        FieldDescriptor::real_quadratic(2, 1).unwrap(),
        FieldDescriptor::real_quadratic(3, -1).unwrap(),
        FieldDescriptor::real_quadratic(5, 1).unwrap(),
        FieldDescriptor::Gaussian,
    ]
}

fn element(field: FieldDescriptor, a: i64, b: i64, den: i64) -> Element<BigInt> {
    match field {
        FieldDescriptor::Rationals => Element::frac(a, den),
        _ => Element::from_parts(a, b, den),
    }
}

fn arb_field() -> impl Strategy<Value = FieldDescriptor> {
    prop::sample::select(fields())
}

fn arb_element(field: FieldDescriptor) -> impl Strategy<Value = Element<BigInt>> {
    (-30i64..=30, -30i64..=30, 1i64..=24).prop_map(move |(a, b, d)| element(field, a, b, d))
}

fn to_f64(q: &Ratio<BigInt>) -> f64 {
    q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap()
}

/// Independent floating evaluation of `|sigma(x)|`.
fn float_abs(field: FieldDescriptor, x: &Element<BigInt>) -> f64 {
    let (a, b) = (to_f64(x.a()), to_f64(x.b()));
    match field {
        FieldDescriptor::Rationals => a.abs(),
        FieldDescriptor::RealQuadratic { d, embedding_sign } => (a + b * embedding_sign as f64 * (d as f64).sqrt()).abs(),
        FieldDescriptor::Gaussian => a.hypot(b),
    }
}

fn pythag_unit(m: i64, n: i64) -> Element<BigInt> {
    Element::from_parts(m * m - n * n, 2 * m * n, m * m + n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_multiplicative((field, x, y) in arb_field().prop_flat_map(|f| (Just(f), arb_element(f), arb_element(f)))) {
        let product = field.mul(&x, &y);
        prop_assert_eq!(field.norm(&product), field.norm(&x).mul(&field.norm(&y)).unwrap());
    }

    #[test]
    fn triangle_inequality(
        (field, x, y) in arb_field().prop_flat_map(|f| (Just(f), arb_element(f), arb_element(f))),
        bn in 0i64..80,
        bd in 1i64..12,
    ) {
        let bound = Ratio::new(BigInt::from(bn), BigInt::from(bd));
        let sum = &x + &y;
        let separate = field.cmp_norm_sum(&[x.clone(), y.clone()], &bound).unwrap();
        let joint = field.cmp_norm_sum(&[sum], &bound).unwrap();
        if separate != Ordering::Greater {
            prop_assert_ne!(joint, Ordering::Greater);
        }
        if separate == Ordering::Less {
            prop_assert_eq!(joint, Ordering::Less);
        }
    }

    #[test]
    fn norm_sums_agree_with_floats(
        (field, xs) in arb_field().prop_flat_map(|f| (Just(f), prop::collection::vec(arb_element(f), 1..5))),
        bn in 0i64..200,
        bd in 1i64..24,
    ) {
        let bound = Ratio::new(BigInt::from(bn), BigInt::from(bd));
        let float_sum: f64 = xs.iter().map(|x| float_abs(field, x)).sum();
        let b = to_f64(&bound);
        let exact = field.cmp_norm_sum(&xs, &bound).unwrap();
        if (float_sum - b).abs() > 1e-9 * (1.0 + b) {
            prop_assert_eq!(exact, float_sum.partial_cmp(&b).unwrap());
        }
    }

    #[test]
    fn unit_group_closure(m1 in 1i64..15, n1 in 0i64..15, m2 in 1i64..15, n2 in 0i64..15, k in 0u8..4) {
        let field = FieldDescriptor::Gaussian;
        let i = UnitElement::new(field, Element::from_parts(0, 1, 1)).unwrap();
        let mut x = UnitElement::new(field, pythag_unit(m1, n1)).unwrap();
        for _ in 0..k {
            x = x.mul(&i);
        }
        let y = UnitElement::new(field, pythag_unit(m2, n2)).unwrap();
        prop_assert!(field.is_unit_norm(x.mul(&y).value()));
        prop_assert!(field.is_unit_norm(x.inverse().value()));
        prop_assert!(x.mul(&x.inverse()).is_one());
    }

    #[test]
    fn pythag_roundtrip(exps in prop::collection::vec(-3i64..=3, PRIMES_1_MOD_4.len()), unit in 0u8..4) {
        let field = FieldDescriptor::Gaussian;
        let mut x = UnitElement::new(field, Element::from_parts(1, 0, 1)).unwrap();
        let i = UnitElement::new(field, Element::from_parts(0, 1, 1)).unwrap();
        for _ in 0..unit {
            x = x.mul(&i);
        }
        let mut expected = BTreeMap::new();
        for (&p, &e) in PRIMES_1_MOD_4.iter().zip(&exps) {
            let prime = gaussian_prime_over(&BigInt::from(p));
            let ratio = UnitElement::new(field, prime.ratio_to_conjugate()).unwrap();
            let step = if e < 0 { ratio.inverse() } else { ratio };
            for _ in 0..e.abs() {
                x = x.mul(&step);
            }
            if e != 0 {
                expected.insert(prime, e);
            }
        }
        let f = pythag_factor(x.value()).unwrap();
        prop_assert_eq!(&f.exponents, &expected);
        prop_assert_eq!(f.unit, unit);
        prop_assert_eq!(&f.recompose(), x.value());
    }

    #[test]
    fn format_parse_roundtrip((field, x) in arb_field().prop_flat_map(|f| (Just(f), arb_element(f)))) {
        let text = field.format(&x);
        prop_assert_eq!(field.parse_element::<BigInt>(&text).unwrap(), x);
    }

    #[test]
    fn inverse_is_inverse((field, x) in arb_field().prop_flat_map(|f| (Just(f), arb_element(f)))) {
        match field.inv(&x) {
            Some(y) => prop_assert!(field.mul(&x, &y).is_one()),
            None => prop_assert!(x.is_zero()),
        }
    }
}

#[test]
fn three_four_five() {
    let x = FieldDescriptor::Gaussian.parse_element::<BigInt>("3/5+4/5*i").unwrap();
    let f = pythag_factor(&x).unwrap();
    let two_plus_i = gaussian_prime_over(&BigInt::from(5));
    assert_eq!((two_plus_i.a.clone(), two_plus_i.b.clone()), (BigInt::from(2), BigInt::from(1)));
    assert_eq!(f.exponents.get(&two_plus_i), Some(&1));
    assert_eq!(f.recompose(), x);
}

#[test]
fn precision_cap_is_reported() {
    let field = FieldDescriptor::Gaussian;
    // |1/2 + 1/2 i| + |1/2 - 1/2 i| = sqrt(2), compared with a close rational
    let x = field.parse_element::<BigInt>("1/2+1/2*i").unwrap();
    let y = field.parse_element::<BigInt>("1/2-1/2*i").unwrap();
    let bound = Ratio::new(BigInt::from(665857), BigInt::from(470832));
    match field.cmp_norm_sum_with(&[x.clone(), y.clone()], &bound, 16) {
        Err(Error::PrecisionExhausted { bits, needed }) => {
            assert!(bits <= 16);
            assert!(needed > 16);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
    assert_eq!(field.cmp_norm_sum_with(&[x, y], &bound, 4096).unwrap(), Ordering::Less);
}
