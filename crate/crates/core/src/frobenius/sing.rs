//! The contravariant map into the critical algebra and the algebra structures
//! that ν transports to Sing V and its dual.

use num_traits::{One, Zero};

use crate::critalg::{CritElement, WAlgebra};
use crate::error::{Error, Result};
use crate::family::ArrangementFamily;
use crate::osflag::{contravariant_pairing, singular_subspace, v_vector, FlagVector};
use crate::scalar::Rational;

use super::period_map;

/// [S]: F_T ↦ w_T, extended linearly.
pub fn contravariant_map_class(alg: &WAlgebra, u: &FlagVector<Rational>) -> CritElement {
    let index = alg.family().index();
    let mut out = alg.zero();
    for (t, c) in u.iter_nonzero(index) {
        out.axpy(c, &alg.w(t));
    }
    out
}

/// Signs σ with ν∘[S] = σ π and [S]∘ν = σ id, or None when the composition
/// is not a multiple of the expected map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionSigns {
    pub alpha_after_s: Option<i8>,
    pub s_after_alpha: Option<i8>,
}

fn common_sign(pairs: impl Iterator<Item = (Vec<Rational>, Vec<Rational>)>) -> Option<i8> {
    let mut sign: Option<i8> = None;
    for (got, want) in pairs {
        let s = if got == want {
            1
        } else if got.iter().zip(&want).all(|(g, w)| g == &-w.clone()) {
            -1
        } else {
            return None;
        };
        if want.iter().all(Zero::is_zero) {
            continue;
        }
        match sign {
            None => sign = Some(s),
            Some(prev) if prev != s => return None,
            _ => {}
        }
    }
    sign
}

pub fn contravariant_compositions(alg: &WAlgebra) -> Result<CompositionSigns> {
    let family = alg.family();
    let sing = singular_subspace(family)?;
    let index = family.index();
    let alpha_after_s = common_sign((0..index.len()).map(|p| {
        let flag = FlagVector::<Rational>::flag(index, index.subset(p));
        let got = alg.nu(&contravariant_map_class(alg, &flag)).into_coeffs();
        (got, sing.project(family, &flag).into_coeffs())
    }));
    let s_after_alpha = common_sign((0..alg.dim()).map(|p| {
        let w = alg.basis_element(p);
        let got = contravariant_map_class(alg, &alg.nu(&w));
        (got.coeffs().to_vec(), w.coeffs().to_vec())
    }));
    Ok(CompositionSigns {
        alpha_after_s,
        s_after_alpha,
    })
}

/// u *_z w on Sing V, transported from the critical algebra through
/// α = c ν: ν(ν⁻¹u · ν⁻¹w) / c.
pub fn induced_multiplication_on_sing(
    alg: &WAlgebra,
    z: &[Rational],
    u: &FlagVector<Rational>,
    w: &FlagVector<Rational>,
    c: &Rational,
) -> Result<FlagVector<Rational>> {
    alg.family().require_good_fiber(z)?;
    let x = alg.nu_inverse(u)?;
    let y = alg.nu_inverse(w)?;
    Ok(alg
        .nu(&alg.multiply(&x, &y, z))
        .scale(&(Rational::one() / c)))
}

/// Checks q(z) *_z x = x on a basis of Sing V.
pub fn check_period_identity(alg: &WAlgebra, z: &[Rational], c: &Rational) -> Result<bool> {
    let family = alg.family();
    let q = period_map(family, z, alg.anchor(), c)?;
    for b in singular_subspace(family)?.basis() {
        if induced_multiplication_on_sing(alg, z, &q, b, c)? != *b {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_points_on_line(family: &ArrangementFamily) -> Result<()> {
    if family.k() != 1 || family.b().iter().any(|r| r != &family.b()[0]) {
        return Err(Error::Unsupported(
            "closed forms are stated for points on a line with equal slopes".into(),
        ));
    }
    Ok(())
}

/// Pairs (i, j) where v_j * v_i differs from a_j/(z_j-z_i) v_i + a_i/(z_i-z_j) v_j,
/// with the diagonal checked against -Σ_{i≠j} v_j * v_i.
pub fn check_sing_product_points(alg: &WAlgebra, z: &[Rational]) -> Result<Vec<(usize, usize)>> {
    let family = alg.family();
    require_points_on_line(family)?;
    let n = family.n();
    let one = Rational::one();
    let v: Vec<FlagVector<Rational>> = (0..n).map(|j| v_vector(family, &[j])).collect();
    let mut failures = Vec::new();
    for j in 0..n {
        let mut off_sum = FlagVector::zeros(n);
        for i in 0..n {
            if i == j {
                continue;
            }
            let got = induced_multiplication_on_sing(alg, z, &v[j], &v[i], &one)?;
            let dz = &z[j] - &z[i];
            let want = v[i]
                .scale(&(family.weight(j) / &dz))
                .sub(&v[j].scale(&(family.weight(i) / &dz)));
            if got != want {
                failures.push((j, i));
            }
            off_sum = off_sum.add(&got);
        }
        let diag = induced_multiplication_on_sing(alg, z, &v[j], &v[j], &one)?;
        if diag != off_sum.scale(&-one.clone()) {
            failures.push((j, j));
        }
    }
    Ok(failures)
}

/// Same check for the dual algebra on (Sing V)*, where h_j is the coordinate
/// functional u ↦ u_j restricted to Sing V and the product is transported by
/// u ↦ S(u, ·). Also checks that -(1/|a|) Σ a_j z_j h_j is the identity.
pub fn check_dual_product_points(alg: &WAlgebra, z: &[Rational]) -> Result<Vec<(usize, usize)>> {
    let family = alg.family();
    require_points_on_line(family)?;
    let n = family.n();
    let sing = singular_subspace(family)?;
    let basis = sing.basis();
    let one = Rational::one();
    // A functional is stored by its values on the basis of Sing V.
    let h = |j: usize| -> Vec<Rational> { basis.iter().map(|b| b.coeffs()[j].clone()).collect() };
    let to_vector = |vals: &[Rational]| -> Result<FlagVector<Rational>> {
        Ok(sing.combine(&sing.gram().solve_vec(vals)?))
    };
    let to_functional = |u: &FlagVector<Rational>| -> Vec<Rational> {
        basis
            .iter()
            .map(|b| contravariant_pairing(family, u, b))
            .collect()
    };
    let mult = |x: &[Rational], y: &[Rational]| -> Result<Vec<Rational>> {
        let p = induced_multiplication_on_sing(alg, z, &to_vector(x)?, &to_vector(y)?, &one)?;
        Ok(to_functional(&p))
    };
    let comb = |terms: &[(Rational, usize)]| -> Vec<Rational> {
        let mut out = vec![Rational::zero(); basis.len()];
        for (c, j) in terms {
            for (o, hv) in out.iter_mut().zip(h(*j)) {
                *o += c * hv;
            }
        }
        out
    };
    let mut failures = Vec::new();
    for j in 0..n {
        let mut weighted = vec![Rational::zero(); basis.len()];
        for i in 0..n {
            if i == j {
                continue;
            }
            let got = mult(&h(j), &h(i))?;
            let dz = &z[i] - &z[j];
            let want = comb(&[(&one / &dz, i), (-&one / &dz, j)]);
            if got != want {
                failures.push((j, i));
            }
            for (w, g) in weighted.iter_mut().zip(&got) {
                *w -= family.weight(i) * g;
            }
        }
        let diag: Vec<Rational> = mult(&h(j), &h(j))?
            .iter()
            .map(|x| family.weight(j) * x)
            .collect();
        if diag != weighted {
            failures.push((j, j));
        }
    }
    let abs_a = family.weight_sum();
    let identity = comb(
        &(0..n)
            .map(|j| (-(family.weight(j) * &z[j]) / abs_a, j))
            .collect::<Vec<_>>(),
    );
    for j in 0..n {
        if mult(&identity, &h(j))? != h(j) {
            failures.push((n, j));
        }
    }
    Ok(failures)
}
