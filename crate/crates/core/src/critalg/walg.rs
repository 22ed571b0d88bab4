//! The algebra of functions on the critical set, presented combinatorially in
//! the anchored w-basis.
//!
//! With generators e_j = [a_j/f_j] and minors d, the elements
//! w_T = Π_{j∈T} a_j · [d_T / Π_{j∈T} f_j] for sorted k-subsets T avoiding a
//! fixed anchor form a basis. Degree-k monomials in the generators reduce to
//! this basis with z-independent coefficients through the linear relations
//! Σ_i d_{i,I} e_i = 0, one for each (k-1)-subset I. Multiplication by a
//! generator has a closed form whose only z-dependence is through the
//! discriminant forms f_{i_0..i_k}.

use std::cell::RefCell;
use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::family::{sort_with_sign, subsets, ArrangementFamily};
use crate::osflag::{contravariant_pairing, v_vector, FlagVector};
use crate::poly::Poly;
use crate::scalar::{to_complex, Complex, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct CritElement {
    coeffs: Vec<Rational>,
}

impl CritElement {
    pub fn zeros(dim: usize) -> Self {
        CritElement {
            coeffs: vec![Rational::zero(); dim],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        CritElement { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn axpy(&mut self, s: &Rational, other: &Self) {
        if s.is_zero() {
            return;
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a += s * b;
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(&Rational::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(&-Rational::one(), other);
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        CritElement {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }
}

/// One admissible elimination step: replace one factor e_j using the
/// relation attached to the (k-1)-subset `relation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationStep {
    pub eliminated: usize,
    pub relation: Vec<usize>,
}

pub struct WAlgebra<'a> {
    family: &'a ArrangementFamily,
    anchor: usize,
    basis: Vec<Vec<usize>>,
    positions: HashMap<Vec<usize>, usize>,
    memo: RefCell<HashMap<Vec<usize>, CritElement>>,
}

impl<'a> WAlgebra<'a> {
    pub fn new(family: &'a ArrangementFamily, anchor: usize) -> Result<Self> {
        family.require_generic()?;
        if anchor >= family.n() {
            return Err(Error::Config(format!(
                "anchor {anchor} out of range for n = {}",
                family.n()
            )));
        }
        let basis: Vec<Vec<usize>> = subsets(family.n(), family.k())
            .into_iter()
            .filter(|t| !t.contains(&anchor))
            .collect();
        let positions = basis
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(WAlgebra {
            family,
            anchor,
            basis,
            positions,
            memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn family(&self) -> &ArrangementFamily {
        self.family
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn zero(&self) -> CritElement {
        CritElement::zeros(self.dim())
    }

    pub fn basis_element(&self, pos: usize) -> CritElement {
        let mut x = self.zero();
        x.coeffs[pos] = Rational::one();
        x
    }

    fn k(&self) -> usize {
        self.family.k()
    }

    /// w for an arbitrary k-tuple, in anchored coordinates.
    pub fn w(&self, tuple: &[usize]) -> CritElement {
        let Some((sorted, sign)) = sort_with_sign(tuple) else {
            return self.zero();
        };
        let sign = Rational::from_integer(sign.into());
        if let Some(&pos) = self.positions.get(&sorted) {
            return self.basis_element(pos).scale(&sign);
        }
        // T contains the anchor: w_{I, anchor} = -Σ_{i ∉ I ∪ anchor} w_{I, i}.
        let rest: Vec<usize> = sorted
            .iter()
            .copied()
            .filter(|&j| j != self.anchor)
            .collect();
        let mut last = rest.clone();
        last.push(self.anchor);
        let (_, parity) = sort_with_sign(&last).expect("distinct");
        let mut out = self.zero();
        for i in (0..self.family.n()).filter(|i| *i != self.anchor && !rest.contains(i)) {
            let mut t = rest.clone();
            t.push(i);
            out.axpy(&-Rational::one(), &self.w(&t));
        }
        out.scale(&(sign * Rational::from_integer(parity.into())))
    }

    /// Admissible steps for a sorted degree-k multiset, in canonical order:
    /// the anchor factor is removed first, then repeated factors. Empty for
    /// squarefree anchor-free monomials.
    pub fn elimination_options(&self, mono: &[usize]) -> Vec<EliminationStep> {
        let mut distinct = mono.to_vec();
        distinct.dedup();
        let n = self.family.n();
        let k = self.k();
        let mut opts = Vec::new();
        let mut push_fills = |eliminated: usize, required: Vec<usize>| {
            let free: Vec<usize> = (0..n)
                .filter(|j| *j != eliminated && !required.contains(j))
                .collect();
            let need = k - 1 - required.len();
            for pick in subsets(free.len(), need) {
                let mut rel = required.clone();
                rel.extend(pick.iter().map(|&p| free[p]));
                rel.sort_unstable();
                opts.push(EliminationStep {
                    eliminated,
                    relation: rel,
                });
            }
        };
        if mono.contains(&self.anchor) {
            let required: Vec<usize> = distinct
                .iter()
                .copied()
                .filter(|&j| j != self.anchor)
                .collect();
            push_fills(self.anchor, required);
            return opts;
        }
        for &j in &distinct {
            if mono.iter().filter(|&&x| x == j).count() >= 2 {
                let mut required: Vec<usize> =
                    distinct.iter().copied().filter(|&x| x != j).collect();
                required.push(self.anchor);
                required.sort_unstable();
                push_fills(j, required);
            }
        }
        opts
    }

    /// e_j = -Σ_{i ∉ I ∪ j} (d_{i,I}/d_{j,I}) e_i applied to one factor.
    pub fn apply_step(
        &self,
        mono: &[usize],
        step: &EliminationStep,
    ) -> Vec<(Rational, Vec<usize>)> {
        let j = step.eliminated;
        let pos = mono
            .iter()
            .position(|&x| x == j)
            .expect("eliminated factor present");
        let mut base = mono.to_vec();
        base.remove(pos);
        let with = |i: usize| {
            let mut t = vec![i];
            t.extend_from_slice(&step.relation);
            self.family.minor(&t)
        };
        let dj = with(j);
        (0..self.family.n())
            .filter(|i| *i != j && !step.relation.contains(i))
            .map(|i| {
                let mut m = base.clone();
                m.push(i);
                m.sort_unstable();
                (-(with(i) / &dj), m)
            })
            .collect()
    }

    fn squarefree_value(&self, mono: &[usize]) -> CritElement {
        let d = self.family.minor(mono);
        self.w(mono).scale(&(Rational::one() / d))
    }

    /// Reduces a degree-k monomial with the canonical elimination order.
    pub fn reduce_monomial(&self, mono: &[usize]) -> CritElement {
        assert_eq!(mono.len(), self.k(), "reduction takes degree-k monomials");
        let mut key = mono.to_vec();
        key.sort_unstable();
        if let Some(x) = self.memo.borrow().get(&key) {
            return x.clone();
        }
        let opts = self.elimination_options(&key);
        let out = match opts.first() {
            None => self.squarefree_value(&key),
            Some(step) => {
                let mut acc = self.zero();
                for (c, m) in self.apply_step(&key, step) {
                    acc.axpy(&c, &self.reduce_monomial(&m));
                }
                acc
            }
        };
        self.memo.borrow_mut().insert(key, out.clone());
        out
    }

    /// Reduces with a caller-chosen step at every stage; `pick` receives the
    /// number of options and returns an index.
    pub fn reduce_monomial_with(
        &self,
        mono: &[usize],
        pick: &mut dyn FnMut(usize) -> usize,
    ) -> CritElement {
        let mut key = mono.to_vec();
        key.sort_unstable();
        let opts = self.elimination_options(&key);
        if opts.is_empty() {
            return self.squarefree_value(&key);
        }
        let step = &opts[pick(opts.len()) % opts.len()];
        let mut acc = self.zero();
        for (c, m) in self.apply_step(&key, step) {
            acc.axpy(&c, &self.reduce_monomial_with(&m, pick));
        }
        acc
    }

    /// Discriminant form f_{i_0..i_k} at z for an ordered (k+1)-tuple.
    fn form_value(&self, tuple: &[usize], z: &[Rational]) -> Rational {
        self.family.generic_form_value(tuple, z)
    }

    /// e_i * w_tuple by the closed form.
    pub fn gen_times_w(&self, i: usize, tuple: &[usize], z: &[Rational]) -> CritElement {
        let Some((sorted, sign)) = sort_with_sign(tuple) else {
            return self.zero();
        };
        let sign = Rational::from_integer(sign.into());
        if !sorted.contains(&i) {
            let mut c = vec![i];
            c.extend_from_slice(&sorted);
            let f = self.form_value(&c, z);
            let coef = sign * self.family.minor(&sorted) / f;
            let mut out = self.zero();
            for l in 0..c.len() {
                let rest: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != l)
                    .map(|(_, &x)| x)
                    .collect();
                let s = if l % 2 == 0 {
                    self.family.weight(c[l]).clone()
                } else {
                    -self.family.weight(c[l]).clone()
                };
                out.axpy(&s, &self.w(&rest));
            }
            return out.scale(&coef);
        }
        // i ∈ T: w_{i,rest} = -Σ_{m ∉ T} w_{m,rest}.
        let rest: Vec<usize> = sorted.iter().copied().filter(|&x| x != i).collect();
        let mut lead = vec![i];
        lead.extend_from_slice(&rest);
        let (_, parity) = sort_with_sign(&lead).expect("distinct");
        let mut out = self.zero();
        for m in (0..self.family.n()).filter(|m| !sorted.contains(m)) {
            let mut t = vec![m];
            t.extend_from_slice(&rest);
            out.axpy(&-Rational::one(), &self.gen_times_w(i, &t, z));
        }
        out.scale(&(sign * Rational::from_integer(parity.into())))
    }

    pub fn gen_times(&self, i: usize, x: &CritElement, z: &[Rational]) -> CritElement {
        let mut out = self.zero();
        for (t, c) in self.basis.iter().zip(&x.coeffs) {
            if !c.is_zero() {
                out.axpy(c, &self.gen_times_w(i, t, z));
            }
        }
        out
    }

    /// Π_{m ∈ mono} e_m at z. Lower degrees are padded with powers of
    /// [1] = |a|^{-1} Σ z_i e_i; higher degrees use the closed-form action.
    pub fn monomial(&self, mono: &[usize], z: &[Rational]) -> CritElement {
        let k = self.k();
        if mono.len() > k {
            let mut x = self.reduce_monomial(&mono[..k]);
            for &i in &mono[k..] {
                x = self.gen_times(i, &x, z);
            }
            return x;
        }
        if mono.len() == k {
            return self.reduce_monomial(mono);
        }
        let pad = k - mono.len();
        let n = self.family.n();
        let scale = Rational::one() / num_traits::pow(self.family.weight_sum().clone(), pad);
        let mut out = self.zero();
        let mut seq = vec![0usize; pad];
        loop {
            let coef = seq.iter().fold(scale.clone(), |acc, &i| acc * &z[i]);
            if !coef.is_zero() {
                let mut m = mono.to_vec();
                m.extend_from_slice(&seq);
                out.axpy(&coef, &self.reduce_monomial(&m));
            }
            let mut p = 0;
            loop {
                if p == pad {
                    return out;
                }
                seq[p] += 1;
                if seq[p] < n {
                    break;
                }
                seq[p] = 0;
                p += 1;
            }
        }
    }

    /// x * y, factoring each w_T of x as d_T Π_{j∈T} e_j.
    pub fn multiply(&self, x: &CritElement, y: &CritElement, z: &[Rational]) -> CritElement {
        let mut out = self.zero();
        for (t, c) in self.basis.iter().zip(&x.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut acc = y.clone();
            for &j in t.iter().rev() {
                acc = self.gen_times(j, &acc, z);
            }
            out.axpy(&(c * self.family.minor(t)), &acc);
        }
        out
    }

    /// Coefficients of the identity element in the anchored basis as
    /// polynomials in z:
    /// |a|^{-k} f_{i0,T}^k / Π_{m=0..k} (-1)^m d_{(i0,T) without position m}.
    pub fn identity_polys(&self) -> Vec<Poly> {
        let n = self.family.n();
        let k = self.k();
        let abs_a = self.family.weight_sum();
        self.basis
            .iter()
            .map(|t| {
                let mut c = vec![self.anchor];
                c.extend_from_slice(t);
                let mut denom = Rational::one();
                for m in 0..c.len() {
                    let rest: Vec<usize> = c
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != m)
                        .map(|(_, &x)| x)
                        .collect();
                    let d = self.family.minor(&rest);
                    denom *= if m % 2 == 0 { d } else { -d };
                }
                let scale = Rational::one() / (denom * num_traits::pow(abs_a.clone(), k));
                let form = Poly::linear(&self.family.generic_form(&c), Rational::zero());
                debug_assert_eq!(form.nvars(), n);
                form.pow(k as u32).scale(&scale)
            })
            .collect()
    }

    pub fn identity_closed_form(&self, z: &[Rational]) -> CritElement {
        CritElement::from_coeffs(self.identity_polys().iter().map(|p| p.eval(z)).collect())
    }

    /// (|a|^{-1} Σ z_j e_j)^k reduced to the basis.
    pub fn identity_by_power(&self, z: &[Rational]) -> CritElement {
        self.monomial(&[], z)
    }

    /// ν(x) = Σ_T x_T v_T.
    pub fn nu(&self, x: &CritElement) -> FlagVector<Rational> {
        let mut out = FlagVector::zeros(self.family.index().len());
        for (t, c) in self.basis.iter().zip(&x.coeffs) {
            if !c.is_zero() {
                out.axpy(c, &v_vector(self.family, t));
            }
        }
        out
    }

    /// Residue form transported through ν, without the global factor c^2:
    /// (-1)^k S(νx, νy).
    pub fn structural_pairing(&self, x: &CritElement, y: &CritElement) -> Rational {
        let s = contravariant_pairing(self.family, &self.nu(x), &self.nu(y));
        if self.k() % 2 == 1 {
            -s
        } else {
            s
        }
    }

    /// Value of x as a function at a point p of the fiber over z.
    pub fn evaluate(&self, x: &CritElement, z: &[Complex], p: &[Complex]) -> Complex {
        let mut acc = Complex::zero();
        for (t, c) in self.basis.iter().zip(&x.coeffs) {
            if c.is_zero() {
                continue;
            }
            acc += to_complex(c) * self.w_value(t, z, p);
        }
        acc
    }

    /// w_T(p) = Π a_T d_T / Π_{j∈T} f_j(p) for any sorted k-subset.
    pub fn w_value(&self, t: &[usize], z: &[Complex], p: &[Complex]) -> Complex {
        let mut v = to_complex(&(self.family.weight_product(t) * self.family.minor(t)));
        for &j in t {
            v /= self.family.f_value(j, z, p);
        }
        v
    }

    /// Coordinates of a vector of Sing V in the image basis {v_T}.
    pub fn nu_inverse(&self, u: &FlagVector<Rational>) -> Result<CritElement> {
        let cols: Vec<Vec<Rational>> = self
            .basis
            .iter()
            .map(|t| v_vector(self.family, t).into_coeffs())
            .collect();
        let m = crate::linalg::Matrix::from_columns(self.family.index().len(), &cols);
        // Least-squares through the normal equations is exact here because the
        // columns are independent and u lies in their span.
        let mt = m.transpose();
        let x = mt.mul(&m).solve_vec(&mt.mul_vec(u.coeffs()))?;
        let back = m.mul_vec(&x);
        if back != u.coeffs() {
            return Err(Error::Identity(
                "vector is not in the span of the v-basis".into(),
            ));
        }
        Ok(CritElement::from_coeffs(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn lines() -> ArrangementFamily {
        let b = vec![
            vec![int(1), int(0)],
            vec![int(0), int(1)],
            vec![int(1), int(1)],
            vec![int(1), int(-1)],
            vec![int(2), int(3)],
        ];
        ArrangementFamily::new(b, vec![int(1), int(2), int(1), int(3), int(1)]).unwrap()
    }

    #[test]
    fn w_is_antisymmetric_and_sums_to_zero() {
        let f = lines();
        for anchor in 0..5 {
            let alg = WAlgebra::new(&f, anchor).unwrap();
            assert_eq!(alg.dim(), 6);
            assert_eq!(alg.w(&[3, 1]), alg.w(&[1, 3]).scale(&int(-1)));
            assert!(alg.w(&[2, 2]).is_zero());
            for i in 0..5 {
                let total = (0..5)
                    .filter(|&j| j != i)
                    .fold(alg.zero(), |acc, j| acc.add(&alg.w(&[i, j])));
                assert!(total.is_zero(), "anchor {anchor}, i {i}");
            }
        }
    }

    #[test]
    fn structural_pairing_is_symmetric() {
        let f = lines();
        let alg = WAlgebra::new(&f, 2).unwrap();
        for p in 0..alg.dim() {
            for q in 0..alg.dim() {
                let (x, y) = (alg.basis_element(p), alg.basis_element(q));
                assert_eq!(
                    alg.structural_pairing(&x, &y),
                    alg.structural_pairing(&y, &x)
                );
            }
        }
    }
}
