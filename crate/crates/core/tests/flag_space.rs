mod common;

use arrfrob::family::{random_positive_weights, subsets};
use arrfrob::osflag::{
    contravariant_pairing, gram_det_points, gram_v, singular_subspace, v_vector, FlagVector,
};
use arrfrob::scalar::{binomial, int, rat, Rational};
use arrfrob::ArrangementFamily;
use common::{ints, moment_family, points, random_generic};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Leibniz expansion; only used on tiny matrices.
fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut acc = Rational::zero();
    for col in 0..n {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][col] * det(&minor);
        acc = if col % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Rank by checking all square minors.
fn rank(rows: &[Vec<Rational>]) -> usize {
    let k = rows.first().map_or(0, |r| r.len());
    for r in (1..=rows.len().min(k)).rev() {
        for rs in subsets(rows.len(), r) {
            for cs in subsets(k, r) {
                let m: Vec<Vec<Rational>> = rs
                    .iter()
                    .map(|&i| cs.iter().map(|&c| rows[i][c].clone()).collect())
                    .collect();
                if !det(&m).is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

fn brute_force_circuits(f: &ArrangementFamily) -> Vec<Vec<usize>> {
    let rows = f.b();
    let pick = |s: &[usize]| s.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
    let mut out = Vec::new();
    for size in 1..=f.k() + 1 {
        for s in subsets(f.n(), size) {
            let dependent = rank(&pick(&s)) < size;
            let minimal = (0..size).all(|drop| {
                let rest: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != drop)
                    .map(|(_, &i)| i)
                    .collect();
                rank(&pick(&rest)) == rest.len()
            });
            if dependent && minimal {
                out.push(s);
            }
        }
    }
    out
}

#[test]
fn circuits_match_brute_force() {
    let families = [
        random_generic(2, 5, 1),
        random_generic(3, 5, 2),
        ArrangementFamily::new(
            vec![
                vec![int(1), int(0)],
                vec![int(0), int(1)],
                vec![int(1), int(1)],
                vec![int(2), int(2)],
                vec![int(1), int(-1)],
            ],
            ints(&[1, 2, 3, 4, 5]),
        )
        .unwrap(),
    ];
    for f in &families {
        let mut got: Vec<Vec<usize>> = f.circuits().iter().map(|c| c.indices.clone()).collect();
        got.sort();
        let mut want = brute_force_circuits(f);
        want.sort();
        assert_eq!(got, want, "{}", f.describe());
        for c in f.circuits() {
            assert!(c.lambda[0].is_one());
            for m in 0..f.k() {
                let s: Rational = c
                    .indices
                    .iter()
                    .zip(&c.lambda)
                    .map(|(&i, l)| l * &f.b()[i][m])
                    .sum();
                assert!(s.is_zero());
            }
        }
    }
}

#[test]
fn lines4_minors() {
    let f = ArrangementFamily::new(
        vec![
            vec![int(1), int(0)],
            vec![int(0), int(1)],
            vec![int(1), int(1)],
            vec![int(1), int(-1)],
        ],
        ints(&[1, 1, 1, 1]),
    )
    .unwrap();
    let want = [
        ([0, 1], 1),
        ([0, 2], 1),
        ([0, 3], -1),
        ([1, 2], -1),
        ([1, 3], -1),
        ([2, 3], -2),
    ];
    for (pair, d) in want {
        assert_eq!(f.minor(&pair), int(d));
        assert_eq!(f.minor(&[pair[1], pair[0]]), int(-d));
    }
    assert_eq!(f.minor(&[2, 2]), int(0));
    assert_eq!(f.circuits().len(), 4);
}

/// f_T(z) = (-1)^k d_{T∖last} f_last(t*), where t* is the common point of the
/// first k hyperplanes of T.
#[test]
fn generic_forms_detect_concurrency() {
    for (k, n, seed) in [(2, 5, 11), (3, 5, 12)] {
        let f = random_generic(k, n, seed);
        let z = f.sample_good_point(3).unwrap();
        for t in subsets(n, k + 1) {
            let (head, last) = (&t[..k], t[k]);
            let rows: Vec<Vec<Rational>> = head.iter().map(|&i| f.b()[i].clone()).collect();
            let d = det(&rows);
            // Cramer's rule for Σ_m b_i^m t_m = -z_i.
            let tstar: Vec<Rational> = (0..k)
                .map(|col| {
                    let m: Vec<Vec<Rational>> = head
                        .iter()
                        .map(|&i| {
                            (0..k)
                                .map(|c| {
                                    if c == col {
                                        -z[i].clone()
                                    } else {
                                        f.b()[i][c].clone()
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    det(&m) / &d
                })
                .collect();
            let f_last = &z[last]
                + f.b()[last]
                    .iter()
                    .zip(&tstar)
                    .map(|(b, t)| b * t)
                    .sum::<Rational>();
            let sign = if k % 2 == 0 {
                Rational::one()
            } else {
                -Rational::one()
            };
            assert_eq!(f.generic_form_value(&t, &z), sign * d * f_last, "T = {t:?}");
        }
    }
}

#[test]
fn singular_vectors_span_sing() {
    for (k, n) in [(1, 4), (2, 4), (2, 5), (3, 5)] {
        let f = moment_family(k, n, (0..n).map(|j| rat(j as i64 + 1, 2)).collect());
        let sing = singular_subspace(&f).unwrap();
        assert_eq!(sing.dim(), binomial(n - 1, k));
        for t in subsets(n, k) {
            assert!(sing.contains(&f, &v_vector(&f, &t)));
        }
    }
}

#[test]
fn gram_closed_form_matches_direct_pairing() {
    for f in [
        points(ints(&[2, 3, 5, 7])),
        random_generic(2, 5, 4),
        moment_family(3, 5, ints(&[1, 2, 3, 4, 5])),
    ] {
        let ts = subsets(f.n(), f.k());
        for t1 in &ts {
            for t2 in &ts {
                let direct = contravariant_pairing(&f, &v_vector(&f, t1), &v_vector(&f, t2));
                assert_eq!(gram_v(&f, t1, t2), direct, "{t1:?} {t2:?}");
            }
        }
    }
}

#[test]
fn contravariant_form_is_diagonal_weight_products() {
    let f = random_generic(2, 4, 9);
    let idx = f.index();
    for t in idx.subsets() {
        let ft: FlagVector<Rational> = FlagVector::flag(idx, t);
        assert_eq!(contravariant_pairing(&f, &ft, &ft), f.weight_product(t));
    }
}

fn weights_strategy() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((1i64..=20, 1i64..=6), 2..=7)
        .prop_map(|v| v.into_iter().map(|(p, q)| rat(p, q)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn points_gram_entries_and_determinant(a in weights_strategy()) {
        let f = points(a.clone());
        let abs_a: Rational = a.iter().sum();
        for i in 0..f.n() {
            for j in 0..f.n() {
                let delta = if i == j { a[i].clone() } else { Rational::zero() };
                prop_assert_eq!(gram_v(&f, &[i], &[j]), delta - &a[i] * &a[j] / &abs_a);
            }
        }
        let prod: Rational = a.iter().product();
        prop_assert_eq!(gram_det_points(&f).unwrap(), prod / abs_a);
    }

    #[test]
    fn points_v_vectors_sum_to_zero(a in weights_strategy()) {
        let f = points(a);
        let total = (0..f.n()).fold(FlagVector::zeros(f.index().len()), |acc, j| acc.add(&v_vector(&f, &[j])));
        prop_assert!(total.is_zero());
    }

    #[test]
    fn random_weights_are_accepted(n in 2usize..8, seed in any::<u64>()) {
        prop_assert!(ArrangementFamily::new(vec![vec![int(1)]; n], random_positive_weights(n, seed)).is_ok());
    }
}
