use num_integer::Integer;
use num_rational::Ratio;
use octak::field::{Element, FieldDescriptor, UnitElement};
use octak::omod::{is_cofibration, is_monomorphism, pushout, Certificate, KMatrix, Matrix};
use proptest::prelude::*;

type Q = Ratio<i64>;

fn units(field: FieldDescriptor) -> Vec<UnitElement<i64>> {
    let mut out = vec![UnitElement::one(field), UnitElement::minus_one(field)];
    if field == FieldDescriptor::Gaussian {
        let i = UnitElement::new(field, Element::from_parts(0, 1, 1)).unwrap();
        out.push(i.clone());
        out.push(i.inverse());
    }
    out
}

fn arb_certificate_between(field: FieldDescriptor, k: usize, n: usize) -> impl Strategy<Value = Certificate<i64>> {
    let perm = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
    let us = prop::collection::vec(prop::sample::select(units(field)), k);
    (perm, us).prop_map(move |(perm, us)| Certificate::new(field, n, perm[..k].to_vec(), us).unwrap())
}

fn arb_certificate(max_n: usize) -> impl Strategy<Value = Certificate<i64>> {
    (prop::sample::select(vec![FieldDescriptor::Rationals, FieldDescriptor::Gaussian]), 1..=max_n)
        .prop_flat_map(|(field, n)| (Just(field), Just(n), 0..=n))
        .prop_flat_map(|(field, n, k)| arb_certificate_between(field, k, n))
}

/// A column of the rational unit ball: integer numerators over a denominator
/// at least their absolute sum.
fn arb_ball_column(rows: usize) -> impl Strategy<Value = Vec<Element<i64>>> {
    (prop::collection::vec(-4i64..=4, rows), 1i64..=3, 0i64..=2).prop_map(|(nums, scale, slack)| {
        let total: i64 = nums.iter().map(|x| x.abs()).sum();
        let den = total.max(1) * scale + slack;
        nums.iter().map(|&x| Element::frac(x, den)).collect()
    })
}

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<i64>> {
    prop::collection::vec(arb_ball_column(rows), cols)
        .prop_map(move |columns| Matrix::from_columns(FieldDescriptor::Rationals, rows, columns).unwrap())
}

/// Rank by fraction-free elimination after clearing column denominators.
fn integer_rank(m: &Matrix<i64>) -> usize {
    let (r, c) = (m.rows(), m.cols());
    let mut a: Vec<Vec<i128>> = vec![vec![0; c]; r];
    for j in 0..c {
        let den = (0..r).fold(1i64, |acc, i| acc.lcm(m.get(i, j).a().denom()));
        for (i, row) in a.iter_mut().enumerate() {
            let q: &Q = m.get(i, j).a();
            row[j] = (*q.numer() * (den / *q.denom())) as i128;
        }
    }
    let mut rank = 0;
    for col in 0..c {
        let Some(p) = (rank..r).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, p);
        for i in rank + 1..r {
            let (x, y) = (a[rank][col], a[i][col]);
            for j in 0..c {
                a[i][j] = a[i][j] * x - a[rank][j] * y;
            }
            let g = a[i].iter().fold(0i128, |g, v| g.gcd(v));
            if g > 1 {
                a[i].iter_mut().for_each(|v| *v /= g);
            }
        }
        rank += 1;
    }
    rank
}

fn standard_projection(field: FieldDescriptor, from: usize, n: usize) -> KMatrix<i64> {
    let mut data = vec![Element::zero(); (n - from) * n];
    for k in 0..n - from {
        data[k * n + from + k] = Element::one();
    }
    KMatrix::new(field, n - from, n, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn certificate_roundtrip(c in arb_certificate(5)) {
        prop_assert_eq!(is_cofibration(&c.to_matrix()), Ok(c));
    }

    #[test]
    fn splitting_diagram_commutes(c in arb_certificate(5)) {
        let field = c.field();
        let (n, k) = (c.target_rank(), c.source_rank());
        let phi = c.splitting_iso();
        let inclusion = Certificate::<i64>::inclusion(field, k, n).to_matrix();
        prop_assert_eq!(phi.as_k().mul(c.to_matrix().as_k()).unwrap(), inclusion.as_k().clone());
        let (_, projection) = c.cokernel();
        prop_assert_eq!(standard_projection(field, k, n).mul(phi.as_k()).unwrap(), projection.as_k().clone());
        prop_assert!(is_cofibration(&phi).is_ok());
    }

    #[test]
    fn cofibrations_are_strict_monos(c in arb_certificate(5)) {
        let a = c.to_matrix();
        let (_, projection) = c.cokernel();
        let kernel = projection.as_k().kernel_basis();
        prop_assert_eq!(kernel.len(), c.source_rank());
        if !kernel.is_empty() {
            let k = KMatrix::from_columns(c.field(), c.target_rank(), &kernel);
            prop_assert_eq!(a.as_k().hcat(&k).unwrap().rank(), c.source_rank());
        }
    }

    #[test]
    fn composition_of_cofibrations((c, d) in arb_certificate(4).prop_flat_map(|c| {
        let (field, m) = (c.field(), c.target_rank());
        (Just(c), (m..=5).prop_flat_map(move |n| arb_certificate_between(field, m, n)))
    })) {
        let composite = c.then(&d).unwrap();
        let product = d.to_matrix().compose(&c.to_matrix()).unwrap();
        prop_assert_eq!(composite.to_matrix(), product);
    }

    #[test]
    fn mono_iff_full_column_rank(
        m in (1usize..=5).prop_flat_map(|r| (Just(r), 1..=r)).prop_flat_map(|(r, c)| arb_matrix(r, c)),
        dependent in any::<bool>(),
    ) {
        let (rows, cols) = (m.rows(), m.cols());
        let m = if dependent && cols > 1 {
            let mut columns: Vec<Vec<Element<i64>>> = (0..cols).map(|j| m.as_k().column(j)).collect();
            columns[cols - 1] = columns[0].clone();
            Matrix::from_columns(FieldDescriptor::Rationals, rows, columns).unwrap()
        } else {
            m
        };
        prop_assert_eq!(is_monomorphism(&m), integer_rank(&m) == cols);
    }

    #[test]
    fn cobase_change((c, f) in arb_certificate(5)
        .prop_filter("rational", |c| c.field() == FieldDescriptor::Rationals)
        .prop_flat_map(|c| { let k = c.source_rank(); (Just(c), (1usize..=5).prop_flat_map(move |r| arb_matrix(r, k))) })) {
        let po = pushout(&c, &f).unwrap();
        prop_assert!(po.square_commutes().unwrap());
        let cofib = is_cofibration(&po.cofib.to_matrix()).unwrap();
        prop_assert_eq!(cofib.cokernel().0, c.cokernel().0);
        // the pushout receives the cocone (cofib, attach) through the identity
        let u = po.induced(&po.cofib.to_matrix(), &po.attach).unwrap();
        prop_assert_eq!(u, Matrix::identity(FieldDescriptor::Rationals, po.cofib.target_rank()));
    }
}

#[test]
fn split_mono_is_not_a_cofibration() {
    let a = Matrix::from_columns(FieldDescriptor::Rationals, 2, vec![vec![Element::<i64>::frac(1, 2), Element::frac(1, 2)]])
        .unwrap();
    assert!(is_monomorphism(&a));
    let refusal = is_cofibration(&a).unwrap_err();
    assert_eq!(refusal.kind(), "NonUnitEntry");
    assert_eq!(refusal.to_string(), "NonUnitEntry(0,0)");
}
