use num_integer::Integer;
use octak::abelian::{AbGroupDescriptor, Rank};
use octak::field::FieldDescriptor;
use octak::ktheory::{ah_e2_page, cyclic_homology, k_group, Coefficients};
use octak::wreath::{brute_abelianization, DEFAULT_BUDGET};
use proptest::prelude::*;

fn cyc(m: u64) -> AbGroupDescriptor {
    AbGroupDescriptor::cyclic(m)
}

/// Order of `A (x) Z/m` and of `Tor(A, Z/m)` for a finitely generated `A`.
fn tensor_and_tor(a: &AbGroupDescriptor, m: u64) -> (u128, u128) {
    let free = match a.free_rank() {
        Rank::Finite(k) => k as u32,
        Rank::CountablyInfinite => unreachable!(),
    };
    let torsion = a.torsion_list().unwrap();
    let g: u128 = torsion.iter().map(|&q| q.gcd(&m) as u128).product();
    ((m as u128).pow(free) * g, g)
}

#[test]
fn integral_homology_of_cyclic_groups() {
    for w in 1..=12u64 {
        assert_eq!(cyclic_homology(w, Coefficients::Integers, 0), AbGroupDescriptor::z());
        for p in 1..=7 {
            let expected = if p % 2 == 1 { cyc(w) } else { AbGroupDescriptor::trivial() };
            assert_eq!(cyclic_homology(w, Coefficients::Integers, p), expected, "w={w} p={p}");
        }
    }
}

proptest! {
    #[test]
    fn universal_coefficients(w in 1u64..=24, m in 2u64..=24, p in 1usize..=6) {
        let with_m = cyclic_homology(w, Coefficients::ModM(m), p).order().unwrap();
        let (tensor, _) = tensor_and_tor(&cyclic_homology(w, Coefficients::Integers, p), m);
        let (_, tor) = tensor_and_tor(&cyclic_homology(w, Coefficients::Integers, p - 1), m);
        prop_assert_eq!(with_m, tensor * tor);
        prop_assert_eq!(cyclic_homology(w, Coefficients::ModM(m), p), cyc(w.gcd(&m)));
    }

    #[test]
    fn descriptors_are_canonical(xs in prop::collection::vec(1u64..=60, 0..6), free in 0u64..3) {
        let a = AbGroupDescriptor::from_invariants(free, &xs);
        let mut rev = xs.clone();
        rev.reverse();
        let b = rev.iter().fold(AbGroupDescriptor::free(Rank::Finite(free)), |acc, &x| cyc(x).direct_sum(&acc));
        prop_assert_eq!(&a, &b);
        let list = a.torsion_list().unwrap();
        let mut sorted = list.clone();
        sorted.sort();
        prop_assert_eq!(list, sorted);
        if free == 0 {
            prop_assert_eq!(a.order().unwrap(), xs.iter().map(|&x| x as u128).product::<u128>());
        }
    }
}

#[test]
fn e2_page_matches_the_displayed_table() {
    let page = ah_e2_page(2, 2, 2).unwrap();
    let expected = [["Z^1", "Z/2", "0"], ["Z/2", "Z/2", "Z/2"], ["Z/2", "Z/2", "Z/2"]];
    for (q, row) in expected.iter().enumerate() {
        for (p, cell) in row.iter().enumerate() {
            assert_eq!(page.get(p, q).unwrap().to_string(), *cell, "({p},{q})");
        }
    }
    for w in [3u64, 4, 5, 6] {
        let page = ah_e2_page(w, 2, 2).unwrap();
        let w2 = w.gcd(&2);
        assert_eq!(page.get(1, 0).unwrap(), &cyc(w));
        for q in 1..=2 {
            assert_eq!(page.get(0, q).unwrap(), &cyc(2));
            assert_eq!(page.get(1, q).unwrap(), &cyc(w2));
            assert_eq!(page.get(2, q).unwrap(), &cyc(w2));
        }
    }
}

#[test]
fn k1_matches_the_abelianized_group() {
    for field in [FieldDescriptor::Rationals, FieldDescriptor::real_quadratic(2, 1).unwrap(), FieldDescriptor::real_quadratic(7, -1).unwrap()] {
        let k1 = k_group(&field, 1).unwrap();
        for n in 2..=4 {
            assert_eq!(brute_abelianization(n, 2, DEFAULT_BUDGET).unwrap(), k1);
        }
    }
    let finite_part = brute_abelianization(3, 4, DEFAULT_BUDGET).unwrap();
    assert_eq!(finite_part.direct_sum(&AbGroupDescriptor::free(Rank::CountablyInfinite)), k_group(&FieldDescriptor::Gaussian, 1).unwrap());
}
