mod common;

use arrfrob::critalg::WAlgebra;
use arrfrob::family::subsets;
use arrfrob::frobenius::{
    eta_and_beta, kernel_relation_defect, multi_identity, period_map, plucker_identities,
    potential_first, potential_first_closed_form, potential_first_poly, potential_identity_rhs,
    potential_second_derivative,
};
use arrfrob::scalar::{int, rat, Rational};
use common::{ints, moment_family, multisets, points, random_generic};
use num_traits::Zero;
use proptest::prelude::*;

#[test]
fn points_third_derivatives_in_closed_form() {
    let a = vec![int(2), rat(1, 2), int(3), rat(5, 3)];
    let f = points(a.clone());
    let z = ints(&[0, 2, 7, -3]);
    let one = int(1);
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                let want: Rational = (0..4)
                    .filter(|&l| l != i)
                    .map(|l| &a[i] * &a[l] / (&z[i] - &z[l]))
                    .sum();
                assert_eq!(
                    potential_second_derivative(&f, &z, &[i, i, i], &one).unwrap(),
                    want
                );
            } else {
                let want = -(&a[i] * &a[j]) / (&z[i] - &z[j]);
                assert_eq!(
                    potential_second_derivative(&f, &z, &[i, i, j], &one).unwrap(),
                    want
                );
                assert_eq!(
                    potential_second_derivative(&f, &z, &[j, i, i], &one).unwrap(),
                    want
                );
            }
        }
    }
}

#[test]
fn lines_fifth_derivative_example() {
    let f = random_generic(2, 4, 60);
    let z = f.sample_good_point(1).unwrap();
    let a = f.weights();
    let want = &a[0] * &a[1] * &a[2] / (f.minor(&[0, 1]) * f.generic_form_value(&[0, 1, 2], &z));
    assert_eq!(
        potential_second_derivative(&f, &z, &[2, 0, 1, 0, 1], &int(1)).unwrap(),
        want
    );
}

/// n = 2, a = (1, 1), z = (0, 1): q = (1/2)(z_0 v_0 + z_1 v_1) = (-1/4, 1/4)
/// and S(q, q) = 1/16 + 1/16.
#[test]
fn two_points_first_potential() {
    let f = points(ints(&[1, 1]));
    assert_eq!(potential_first(&f, &ints(&[0, 1]), 0).unwrap(), rat(1, 8));
}

#[test]
fn three_points_period_map() {
    let f = points(ints(&[1, 1, 1]));
    let q = period_map(&f, &ints(&[0, 1, 3]), 0, &int(1)).unwrap();
    assert_eq!(q.coeffs(), &[rat(4, 9), rat(1, 9), rat(-5, 9)]);
    // c scales q linearly.
    let q2 = period_map(&f, &ints(&[0, 1, 3]), 0, &int(2)).unwrap();
    assert_eq!(q2, q.scale(&int(2)));
}

#[test]
fn first_potential_closed_forms_agree() {
    for f in [
        points(vec![int(1), rat(3, 2), int(4), rat(1, 3)]),
        random_generic(2, 4, 61),
        random_generic(2, 5, 62),
    ] {
        for anchor in [0, f.n() - 1] {
            assert_eq!(
                potential_first_poly(&f, anchor).unwrap(),
                potential_first_closed_form(&f).unwrap()
            );
        }
    }
    assert!(potential_first_closed_form(&moment_family(3, 5, ints(&[1, 2, 3, 4, 5]))).is_err());
}

#[test]
fn structure_constants_from_first_potential() {
    for f in [
        points(ints(&[1, 2, 3, 4])),
        random_generic(2, 4, 63),
        moment_family(3, 5, ints(&[2, 1, 3, 1, 2])),
    ] {
        let alg = WAlgebra::new(&f, 0).unwrap();
        let p = potential_first_poly(&f, 0).unwrap();
        let z = f.sample_good_point(2).unwrap();
        for r in 0..=2 * f.k() {
            for ms in multisets(f.n(), r).into_iter().take(40) {
                let (lhs, rhs) = multi_identity(&alg, &p, &z, &ms).unwrap();
                assert_eq!(lhs, rhs, "k = {} ms = {ms:?}", f.k());
            }
        }
    }
}

#[test]
fn eta_constants() {
    let a = vec![int(2), rat(1, 2), int(3)];
    let f = points(a.clone());
    let abs_a: Rational = a.iter().sum();
    let z = ints(&[0, 1, 5]);
    for i in 0..3 {
        for j in 0..3 {
            let e = eta_and_beta(&f, &z, i, j, 0).unwrap();
            let delta = if i == j {
                a[i].clone()
            } else {
                Rational::zero()
            };
            let want = &a[i] * &a[j] / &abs_a - delta;
            assert_eq!(e.residue, want);
            assert_eq!(e.from_period_map, want);
            assert_eq!(e.closed_form, Some(want));
        }
    }
    let g = random_generic(2, 5, 64);
    let z = g.sample_good_point(3).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let e = eta_and_beta(&g, &z, i, j, 1).unwrap();
            assert_eq!(e.residue, e.from_period_map);
        }
    }
}

#[test]
fn kernel_relations_and_plucker() {
    let f = random_generic(2, 5, 65);
    let z = f.sample_good_point(4).unwrap();
    assert!(plucker_identities(&f, &z).unwrap());
    for rest in 0..5 {
        for ms in multisets(5, 4).into_iter().step_by(7) {
            assert!(kernel_relation_defect(&f, &z, &[rest], &ms)
                .unwrap()
                .is_zero());
        }
    }
    let g = points(ints(&[1, 2, 3]));
    let zg = ints(&[0, 1, 4]);
    for ms in multisets(3, 2) {
        assert!(kernel_relation_defect(&g, &zg, &[], &ms).unwrap().is_zero());
    }
    assert!(plucker_identities(&g, &zg).is_err());
}

#[test]
fn potential_identity_is_symmetric_in_the_tuple() {
    let f = moment_family(3, 5, ints(&[1, 2, 1, 3, 2]));
    let z = f.sample_good_point(5).unwrap();
    let one = int(1);
    let base = potential_second_derivative(&f, &z, &[0, 1, 1, 2, 3, 4, 4], &one).unwrap();
    assert_eq!(
        potential_second_derivative(&f, &z, &[4, 1, 3, 0, 4, 2, 1], &one).unwrap(),
        base
    );
    let alg = WAlgebra::new(&f, 2).unwrap();
    assert_eq!(
        potential_identity_rhs(&alg, &z, &[0, 1, 1, 2, 3, 4, 4]),
        base
    );
    for s in subsets(5, 4) {
        let ms = [s.as_slice(), &s[..3]].concat();
        assert_eq!(
            potential_second_derivative(&f, &z, &ms, &one).unwrap(),
            potential_identity_rhs(&alg, &z, &ms)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn points_potential_identity(
        a in prop::collection::vec((1i64..=9, 1i64..=4), 3..=5),
        seed in 0u64..1000,
        anchor_pick in 0usize..5,
    ) {
        let f = points(a.into_iter().map(|(p, q)| rat(p, q)).collect());
        let z = f.sample_good_point(seed).unwrap();
        let alg = WAlgebra::new(&f, anchor_pick % f.n()).unwrap();
        for ms in multisets(f.n(), 3) {
            prop_assert_eq!(potential_second_derivative(&f, &z, &ms, &int(1)).unwrap(), potential_identity_rhs(&alg, &z, &ms));
        }
    }

    #[test]
    fn lines_potential_identity(seed in 0u64..500, anchor in 0usize..4) {
        let f = random_generic(2, 4, seed);
        let z = f.sample_good_point(seed + 1).unwrap();
        let alg = WAlgebra::new(&f, anchor).unwrap();
        for ms in multisets(4, 5).into_iter().step_by(3) {
            prop_assert_eq!(potential_second_derivative(&f, &z, &ms, &int(1)).unwrap(), potential_identity_rhs(&alg, &z, &ms));
        }
    }
}
