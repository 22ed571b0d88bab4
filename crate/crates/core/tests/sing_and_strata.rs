mod common;

use arrfrob::critalg::WAlgebra;
use arrfrob::frobenius::{
    check_dual_product_points, check_period_identity, check_sing_product_points,
    contravariant_compositions, induced_multiplication_on_sing, strata_restriction_k1,
    stratum_family,
};
use arrfrob::osflag::singular_subspace;
use arrfrob::scalar::{int, rat};
use arrfrob::Error;
use common::{ints, moment_family, points, random_generic};

#[test]
fn composition_signs_by_dimension() {
    let cases = [
        (points(ints(&[1, 2, 3, 4])), -1),
        (random_generic(2, 4, 70), 1),
        (random_generic(2, 5, 71), 1),
        (moment_family(3, 5, ints(&[1, 2, 3, 4, 5])), 1),
    ];
    for (f, sign) in cases {
        let alg = WAlgebra::new(&f, 0).unwrap();
        let signs = contravariant_compositions(&alg).unwrap();
        assert_eq!(signs.alpha_after_s, Some(sign), "k = {}", f.k());
        assert_eq!(signs.s_after_alpha, Some(sign), "k = {}", f.k());
    }
}

#[test]
fn period_map_is_image_of_identity() {
    for f in [
        points(ints(&[3, 1, 2])),
        random_generic(2, 4, 72),
        moment_family(3, 5, ints(&[1, 1, 2, 3, 5])),
    ] {
        let alg = WAlgebra::new(&f, 0).unwrap();
        let z = f.sample_good_point(9).unwrap();
        assert!(check_period_identity(&alg, &z, &int(1)).unwrap());
    }
}

#[test]
fn points_products_in_closed_form() {
    let f = points(vec![int(1), rat(5, 2), int(2), rat(1, 3)]);
    let alg = WAlgebra::new(&f, 2).unwrap();
    let z = f.sample_good_point(4).unwrap();
    assert!(check_sing_product_points(&alg, &z).unwrap().is_empty());
    assert!(check_dual_product_points(&alg, &z).unwrap().is_empty());
    let lines = random_generic(2, 4, 73);
    let alg = WAlgebra::new(&lines, 0).unwrap();
    assert!(check_sing_product_points(&alg, &lines.sample_good_point(1).unwrap()).is_err());
}

#[test]
fn induced_product_is_commutative_with_unit_q() {
    let f = random_generic(2, 5, 74);
    let alg = WAlgebra::new(&f, 0).unwrap();
    let z = f.sample_good_point(6).unwrap();
    let sing = singular_subspace(&f).unwrap();
    let q = arrfrob::frobenius::period_map(&f, &z, 0, &int(1)).unwrap();
    let basis = sing.basis();
    for u in basis {
        assert_eq!(
            induced_multiplication_on_sing(&alg, &z, &q, u, &int(1)).unwrap(),
            u.clone()
        );
        for w in basis {
            let uw = induced_multiplication_on_sing(&alg, &z, u, w, &int(1)).unwrap();
            assert_eq!(
                uw,
                induced_multiplication_on_sing(&alg, &z, w, u, &int(1)).unwrap()
            );
            assert!(sing.contains(&f, &uw));
        }
    }
}

#[test]
fn stratum_validation() {
    let f = points(ints(&[1, 2, 3, 4]));
    assert!(stratum_family(&f, &[vec![0, 1, 2, 3]]).is_err());
    assert!(stratum_family(&f, &[vec![0, 1], vec![2]]).is_err());
    assert!(stratum_family(&f, &[vec![0, 1], vec![1, 2], vec![3]]).is_err());
    let strat = stratum_family(&f, &[vec![0, 1], vec![2, 3]]).unwrap();
    assert_eq!(strat.n(), 2);
    assert_eq!(strat.weights(), &[int(3), int(7)]);
    let lines = random_generic(2, 4, 75);
    assert!(matches!(
        stratum_family(&lines, &[vec![0, 1], vec![2, 3]]),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn strata_with_three_blocks_of_five_points() {
    let f = points(vec![int(1), rat(1, 2), int(2), rat(3, 2), int(3)]);
    for blocks in [
        vec![vec![0, 2], vec![1, 4], vec![3]],
        vec![vec![0, 1, 2], vec![3, 4]],
    ] {
        let strat = stratum_family(&f, &blocks).unwrap();
        for seed in 0..2 {
            let x = strat.sample_good_point(seed).unwrap();
            let report = strata_restriction_k1(&f, &blocks, &x).unwrap();
            let failed: Vec<_> = report
                .checks
                .iter()
                .filter(|c| !c.holds)
                .map(|c| c.name.clone())
                .collect();
            assert!(failed.is_empty(), "{blocks:?}: {failed:?}");
        }
    }
}
