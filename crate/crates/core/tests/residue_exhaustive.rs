use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::Signed;
use octak::residue::{
    apply_projector, enumerate_faces, is_idempotent_projector, k0_reduce, module_image, project, reduce, Face, SignMatrix,
};
use proptest::prelude::*;

fn patterns(n: usize) -> impl Iterator<Item = SignMatrix> {
    let total = 3usize.pow((n * n) as u32);
    (0..total).map(move |mut code| {
        let entries = (0..n * n)
            .map(|_| {
                let s = (code % 3) as i8 - 1;
                code /= 3;
                s
            })
            .collect();
        SignMatrix::new(n, n, entries).unwrap()
    })
}

#[test]
fn every_small_idempotent_pattern_reduces() {
    for (n, expected) in [(1, 2), (2, 14), (3, 252)] {
        let mut count = 0;
        let mut failures = Vec::new();
        for a in patterns(n).filter(is_idempotent_projector) {
            count += 1;
            match k0_reduce(&a) {
                Ok(t) => {
                    t.verify().unwrap();
                    let m = module_image(&a).unwrap();
                    assert!(m.is_submodule(), "{a}");
                }
                Err(e) => failures.push(format!("{a}: {e}")),
            }
        }
        assert_eq!(count, expected);
        assert!(failures.is_empty(), "{failures:?}");
    }
}

#[test]
fn lift_then_project_is_identity() {
    for n in 0..=6 {
        for f in enumerate_faces(n).unwrap() {
            let lift = f.barycentric_lift::<i64>();
            assert_eq!(project(&lift), f);
            assert_eq!(reduce(&lift), f);
        }
    }
}

/// Block sums of small idempotent patterns, conjugated by a permutation and
/// a diagonal sign change.
fn arb_idempotent() -> impl Strategy<Value = SignMatrix> {
    let blocks = prop::collection::vec(prop::sample::select(vec!["+", "0", "+0,++", "++,++", "+-,-+", "++,0+"]), 1..=4);
    blocks
        .prop_filter("at most six coordinates", |bs| bs.iter().map(|b| b.split(',').count()).sum::<usize>() <= 6)
        .prop_flat_map(|bs| {
            let n: usize = bs.iter().map(|b| b.split(',').count()).sum();
            (Just(bs), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(prop::sample::select(vec![-1i8, 1]), n))
        })
        .prop_map(|(bs, perm, signs)| {
            let n = perm.len();
            let mut entries = vec![0i8; n * n];
            let mut offset = 0;
            for b in &bs {
                let m: SignMatrix = b.parse().unwrap();
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        entries[perm[offset + i] * n + perm[offset + j]] = m.get(i, j);
                    }
                }
                offset += m.rows();
            }
            SignMatrix::new(n, n, entries).unwrap().conjugate(&signs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_action_is_idempotent(a in arb_idempotent()) {
        prop_assert!(is_idempotent_projector(&a));
        for f in enumerate_faces(a.cols()).unwrap() {
            let once = apply_projector(&a, &f).unwrap();
            prop_assert_eq!(apply_projector(&a, &once).unwrap(), once);
        }
    }

    #[test]
    fn reduction_of_block_idempotents(a in arb_idempotent()) {
        let trace = k0_reduce(&a).unwrap();
        trace.verify().unwrap();
        prop_assert!(module_image(&a).unwrap().is_submodule());
    }

    #[test]
    fn sign_conjugation_preserves_modules(a in arb_idempotent(), seed in any::<u16>()) {
        let n = a.rows();
        let signs: Vec<i8> = (0..n).map(|k| if seed >> k & 1 == 1 { -1 } else { 1 }).collect();
        let b = a.conjugate(&signs);
        prop_assert!(is_idempotent_projector(&b));
        let (ma, mb) = (module_image(&a).unwrap(), module_image(&b).unwrap());
        prop_assert_eq!(ma.len(), mb.len());
        let mapped: BTreeSet<Face> = ma
            .elements()
            .iter()
            .map(|f| Face::new(f.signs().iter().zip(&signs).map(|(x, s)| x * s).collect()).unwrap())
            .collect();
        prop_assert_eq!(&mapped, mb.elements());
    }

    /// Any lift of norm one gives the same face as the barycentric one.
    #[test]
    fn action_does_not_depend_on_the_lift(a in arb_idempotent(), weights in prop::collection::vec(1i64..=5, 36)) {
        let n = a.rows();
        for f in enumerate_faces(n).unwrap().into_iter().step_by(7) {
            let expected = apply_projector(&a, &f).unwrap();
            let lift = |face: &Face, salt: usize| -> Vec<Ratio<i64>> {
                let support = face.support();
                let total: i64 = support.iter().map(|&i| weights[(i + salt) % weights.len()]).sum();
                face.signs()
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| if s == 0 { Ratio::from_integer(0) } else { Ratio::new(s as i64 * weights[(i + salt) % weights.len()], total) })
                    .collect()
            };
            let v = lift(&f, 0);
            let mut out = vec![Ratio::from_integer(0i64); n];
            for j in 0..n {
                let col = lift(&a.column(j), 6 * (j + 1));
                for i in 0..n {
                    out[i] += v[j] * col[i];
                }
            }
            let norm: Ratio<i64> = out.iter().map(|x| x.abs()).sum();
            let got = if norm < Ratio::from_integer(1) {
                Face::zero(n)
            } else {
                Face::new(out.iter().map(|x| x.numer().signum() as i8).collect()).unwrap()
            };
            prop_assert_eq!(got, expected);
        }
    }
}
