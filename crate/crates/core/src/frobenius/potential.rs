//! Period map q(z) = α([1]), the potentials P = S(q, q) and P̃, and the
//! identities tying their derivatives to products in the critical algebra.
//!
//! P̃ involves logarithms and is never evaluated; only its derivatives of
//! order ≥ 2k+1, which are rational in z, are computed.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::critalg::WAlgebra;
use crate::error::{Error, Result};
use crate::family::{subsets, ArrangementFamily};
use crate::gaussmanin::{conformal_block, eval_polys};
use crate::linalg::Matrix;
use crate::osflag::{contravariant_pairing, form_diagonal, FlagVector};
use crate::poly::Poly;
use crate::scalar::{binomial, factorial, format_rational, int, Rational};

/// q(z) with the normalization constant c.
pub fn period_map(
    family: &ArrangementFamily,
    z: &[Rational],
    anchor: usize,
    c: &Rational,
) -> Result<FlagVector<Rational>> {
    family.require_good_fiber(z)?;
    Ok(eval_polys(&conformal_block(family, anchor, c)?, z))
}

/// ∂q/∂z_j at z as the columns of a dim V × n matrix.
pub fn period_map_jacobian(
    family: &ArrangementFamily,
    z: &[Rational],
    anchor: usize,
) -> Result<Matrix<Rational>> {
    let block = conformal_block(family, anchor, &Rational::one())?;
    Ok(Matrix::from_fn(block.len(), family.n(), |r, j| {
        block[r].derivative(j).eval(z)
    }))
}

/// P = S(q, q) as a polynomial in z (with c = 1; P scales by c^2).
pub fn potential_first_poly(family: &ArrangementFamily, anchor: usize) -> Result<Poly> {
    let block = conformal_block(family, anchor, &Rational::one())?;
    let diag = form_diagonal(family);
    let mut p = Poly::zero(family.n());
    for (q, d) in block.iter().zip(&diag) {
        if !q.is_zero() {
            p = p.add(&q.mul(q).scale(d));
        }
    }
    Ok(p)
}

pub fn potential_first(
    family: &ArrangementFamily,
    z: &[Rational],
    anchor: usize,
) -> Result<Rational> {
    let q = period_map(family, z, anchor, &Rational::one())?;
    Ok(contravariant_pairing(family, &q, &q))
}

/// Closed forms of P: Σ_{i<j} a_i a_j (z_i - z_j)^2 / |a|^3 for points on a
/// line, Σ_{i<j<k} a_i a_j a_k f_{ijk}^4 / (|a|^5 (d_ij d_jk d_ki)^2) for lines.
pub fn potential_first_closed_form(family: &ArrangementFamily) -> Result<Poly> {
    family.require_generic()?;
    let n = family.n();
    let abs_a = family.weight_sum().clone();
    let mut p = Poly::zero(n);
    match family.k() {
        1 if family.b().iter().all(|r| r == &family.b()[0]) => {
            let s = Rational::one() / num_traits::pow(abs_a, 3);
            for pair in subsets(n, 2) {
                let mut coeffs = vec![Rational::zero(); n];
                coeffs[pair[0]] = Rational::one();
                coeffs[pair[1]] = -Rational::one();
                let diff = Poly::linear(&coeffs, Rational::zero());
                p = p.add(&diff.pow(2).scale(&(family.weight_product(&pair) * &s)));
            }
        }
        2 => {
            let s = Rational::one() / num_traits::pow(abs_a, 5);
            for t in subsets(n, 3) {
                let (i, j, k) = (t[0], t[1], t[2]);
                let f = Poly::linear(&family.generic_form(&t), Rational::zero());
                let d = family.minor(&[i, j]) * family.minor(&[j, k]) * family.minor(&[k, i]);
                p = p.add(
                    &f.pow(4)
                        .scale(&(family.weight_product(&t) * &s / (&d * &d))),
                );
            }
        }
        k => return Err(Error::Unsupported(format!("closed form of P for k = {k}"))),
    }
    Ok(p)
}

/// ∂^{2k+1} P̃ / ∂z_{m_0}..∂z_{m_2k} at z, with normalization c^2:
/// c^2 Σ_C (Π_{C} a / Π_l d^2_{C without l}) Π_r λ^C_{m_r} / f_C(z),
/// where f_C = Σ λ^C_j z_j is the generic discriminant form of C.
pub fn potential_second_derivative(
    family: &ArrangementFamily,
    z: &[Rational],
    ms: &[usize],
    c_squared: &Rational,
) -> Result<Rational> {
    family.require_generic()?;
    family.require_good_fiber(z)?;
    let k = family.k();
    if ms.len() < 2 * k + 1 {
        return Err(Error::Unsupported(format!(
            "derivatives of order {} of the second potential contain logarithms",
            ms.len()
        )));
    }
    let mut acc = Rational::zero();
    for c in subsets(family.n(), k + 1) {
        if ms.iter().any(|m| !c.contains(m)) {
            continue;
        }
        let form = family.generic_form(&c);
        let mut coef = family.weight_product(&c);
        for l in 0..c.len() {
            let rest: Vec<usize> = c
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != l)
                .map(|(_, &x)| x)
                .collect();
            let d = family.minor(&rest);
            coef /= &d * &d;
        }
        let lam: Rational = ms.iter().fold(Rational::one(), |acc, &m| acc * &form[m]);
        let f = family.generic_form_value(&c, z);
        let order = ms.len() - (2 * k + 1);
        // d^{order}/du^{order} of (2k)!/u contributes (-1)^order order! / u^order.
        let mut tail =
            Rational::from_integer(factorial(order as u32)) / num_traits::pow(f.clone(), order);
        if order % 2 == 1 {
            tail = -tail;
        }
        acc += coef * lam * tail / f;
    }
    Ok(acc * c_squared)
}

/// Right side (-1)^k (e_{m_0} * .. * e_{m_2k}, [1])_z, computed structurally
/// as S(ν(Π e), ν([1])) with the residue form transported through ν.
pub fn potential_identity_rhs(alg: &WAlgebra, z: &[Rational], ms: &[usize]) -> Rational {
    let product = alg.monomial(ms, z);
    let one = alg.identity_closed_form(z);
    let pairing = alg.structural_pairing(&product, &one);
    if alg.family().k() % 2 == 1 {
        -pairing
    } else {
        pairing
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialRow {
    pub tuple: Vec<usize>,
    pub lhs: String,
    pub rhs: String,
    pub mode: &'static str,
    pub abs_err: f64,
    #[serde(skip)]
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialReport {
    pub z: Vec<String>,
    pub p_value: String,
    pub rows: Vec<PotentialRow>,
}

impl PotentialReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Both sides of ∂^{2k+1}P̃ = (-1)^k (Π e, [1]) for each requested tuple.
pub fn potential_report(
    family: &ArrangementFamily,
    z: &[Rational],
    tuples: &[Vec<usize>],
    anchor: usize,
) -> Result<PotentialReport> {
    let alg = WAlgebra::new(family, anchor)?;
    let mut rows = Vec::new();
    for ms in tuples {
        let lhs = potential_second_derivative(family, z, ms, &Rational::one())?;
        let rhs = potential_identity_rhs(&alg, z, ms);
        let holds = lhs == rhs;
        rows.push(PotentialRow {
            tuple: ms.clone(),
            lhs: format_rational(&lhs),
            rhs: format_rational(&rhs),
            mode: "exact",
            abs_err: crate::scalar::rational_to_f64(&(&lhs - &rhs)).abs(),
            holds,
        });
    }
    Ok(PotentialReport {
        z: z.iter().map(format_rational).collect(),
        p_value: format_rational(&potential_first(family, z, anchor)?),
        rows,
    })
}

/// A_{k,r} = Σ_i C(r,i) (k!)^2 / ((k-i)! (k-r+i)!), with i running over
/// 0..=r when r ≤ k and over r-k..=k otherwise.
pub fn a_constant(k: usize, r: usize) -> Result<BigInt> {
    if r > 2 * k {
        return Err(Error::Unsupported(format!(
            "A_{{k,r}} needs r ≤ 2k, got k = {k}, r = {r}"
        )));
    }
    let (lo, hi) = if r <= k { (0, r) } else { (r - k, k) };
    let kf = factorial(k as u32);
    let mut acc = BigInt::zero();
    for i in lo..=hi {
        let term = BigInt::from(binomial(r, i)) * &kf * &kf
            / (factorial((k - i) as u32) * factorial((k + i - r) as u32));
        acc += term;
    }
    Ok(acc)
}

/// Both sides of (Π_{m ∈ ms} e_m, [1]) = (-1)^k |a|^r / A_{k,r} ∂^r P, with
/// P given as a polynomial (see `potential_first_poly`).
pub fn multi_identity(
    alg: &WAlgebra,
    p: &Poly,
    z: &[Rational],
    ms: &[usize],
) -> Result<(Rational, Rational)> {
    let family = alg.family();
    let k = family.k();
    let r = ms.len();
    let lhs = alg.structural_pairing(&alg.monomial(ms, z), &alg.identity_closed_form(z));
    let deriv = ms
        .iter()
        .fold(p.clone(), |acc, &m| acc.derivative(m))
        .eval(z);
    let a = Rational::from_integer(a_constant(k, r)?);
    let mut rhs = num_traits::pow(family.weight_sum().clone(), r) * deriv / a;
    if k % 2 == 1 {
        rhs = -rhs;
    }
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaValues {
    /// (e_i, e_j)_z through the structural residue form.
    pub residue: Rational,
    /// |a|^2/k^2 (-1)^k S(∂_i q, ∂_j q).
    pub from_period_map: Rational,
    /// Constant value for points on a line, when applicable.
    pub closed_form: Option<Rational>,
}

pub fn eta_and_beta(
    family: &ArrangementFamily,
    z: &[Rational],
    i: usize,
    j: usize,
    anchor: usize,
) -> Result<EtaValues> {
    family.require_good_fiber(z)?;
    let alg = WAlgebra::new(family, anchor)?;
    let k = family.k();
    let residue = alg.structural_pairing(&alg.monomial(&[i], z), &alg.monomial(&[j], z));
    let jac = period_map_jacobian(family, z, anchor)?;
    let di = FlagVector::from_coeffs(jac.column(i));
    let dj = FlagVector::from_coeffs(jac.column(j));
    let abs_a = family.weight_sum();
    let mut from_period_map =
        contravariant_pairing(family, &di, &dj) * abs_a * abs_a / int((k * k) as i64);
    if k % 2 == 1 {
        from_period_map = -from_period_map;
    }
    let closed_form = (k == 1).then(|| {
        let prod = family.weight(i) * family.weight(j) / abs_a;
        if i == j {
            prod - family.weight(i)
        } else {
            prod
        }
    });
    Ok(EtaValues {
        residue,
        from_period_map,
        closed_form,
    })
}

/// Σ_j d_{j,T'} ∂_j ∂^{2k}P̃ for a (k-1)-tuple T' and a 2k-tuple of indices.
pub fn kernel_relation_defect(
    family: &ArrangementFamily,
    z: &[Rational],
    rest: &[usize],
    ms: &[usize],
) -> Result<Rational> {
    let k = family.k();
    if rest.len() + 1 != k || ms.len() != 2 * k {
        return Err(Error::Dimension(
            "kernel relation needs k-1 and 2k indices".into(),
        ));
    }
    let mut acc = Rational::zero();
    for j in 0..family.n() {
        let mut tuple = vec![j];
        tuple.extend_from_slice(rest);
        let d = family.minor(&tuple);
        if d.is_zero() {
            continue;
        }
        let mut all = vec![j];
        all.extend_from_slice(ms);
        acc += d * potential_second_derivative(family, z, &all, &Rational::one())?;
    }
    Ok(acc)
}

/// The two identities among discriminant forms of four generic lines.
pub fn plucker_identities(family: &ArrangementFamily, z: &[Rational]) -> Result<bool> {
    if family.k() != 2 {
        return Err(Error::Unsupported(
            "Plücker identities are stated for lines".into(),
        ));
    }
    family.require_generic()?;
    let f = |i: usize, j: usize, k: usize| family.generic_form_value(&[i, j, k], z);
    let d = |i: usize, j: usize| family.minor(&[i, j]);
    let n = family.n();
    for q in subsets(n, 4) {
        let (i, j, k, l) = (q[0], q[1], q[2], q[3]);
        let first = f(i, j, k) / (d(k, i) * d(i, j))
            + f(i, k, l) / (d(l, i) * d(i, k))
            + f(i, l, j) / (d(j, i) * d(i, l));
        let sq = |a: usize, b: usize, c: usize| {
            let v = f(a, b, c);
            &v * &v / (d(a, b) * d(b, c) * d(c, a))
        };
        let second = sq(i, j, k) - sq(j, k, l) + sq(k, l, i) - sq(l, i, j);
        if !first.is_zero() || !second.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
