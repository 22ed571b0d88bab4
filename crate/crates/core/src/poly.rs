//! Polynomials with rational coefficients.
//!
//! [`Poly`] is a sparse multivariate polynomial, used for closed forms in the
//! base coordinates z and for the critical-point equations in t. [`UniPoly`]
//! is a dense univariate polynomial used by the elimination step.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::from_integer(1.into()));
        p
    }

    /// Σ_i coeffs[i] x_i + constant.
    pub fn linear(coeffs: &[Rational], constant: Rational) -> Self {
        let nvars = coeffs.len();
        let mut p = Self::constant(nvars, constant);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == d)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::from_integer(1.into())))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, Rational::from_integer(1.into()));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(e[i].into()));
        }
        out
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        assert_eq!(x.len(), self.nvars, "polynomial arity");
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut term = S::from_rational(c);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    term = term * xi.powu(k);
                }
            }
            acc = acc + term;
        }
        acc
    }
}

/// Dense univariate polynomial, coefficients from the constant term upwards.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval<S: Scalar>(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + S::from_rational(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return UniPoly::new(vec![]);
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    /// Divides by (x - root); returns quotient and remainder.
    pub fn div_linear(&self, root: &Rational) -> (UniPoly, Rational) {
        let Some(deg) = self.degree() else {
            return (UniPoly::new(vec![]), Rational::zero());
        };
        if deg == 0 {
            return (UniPoly::new(vec![]), self.coeffs[0].clone());
        }
        let mut q = vec![Rational::zero(); deg];
        let mut carry = Rational::zero();
        for i in (0..=deg).rev() {
            carry = &carry * root + &self.coeffs[i];
            if i > 0 {
                q[i - 1] = carry.clone();
            }
        }
        (UniPoly::new(q), carry)
    }

    /// Newton-form interpolation through distinct nodes.
    pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> Self {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        let mut dd = ys.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
            }
        }
        let mut acc = UniPoly::new(vec![dd[n - 1].clone()]);
        for i in (0..n - 1).rev() {
            acc = acc.mul(&UniPoly::new(vec![
                -xs[i].clone(),
                Rational::from_integer(1.into()),
            ]));
            let mut c = acc.coeffs.clone();
            if c.is_empty() {
                c.push(Rational::zero());
            }
            c[0] += &dd[i];
            acc = UniPoly::new(c);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn derivative_and_eval() {
        // p = (x0 + 2 x1)^2
        let l = Poly::linear(&[int(1), int(2)], int(0));
        let p = l.pow(2);
        assert!(p.is_homogeneous(2));
        let d0 = p.derivative(0);
        assert_eq!(d0.eval(&[int(1), int(1)]), int(6));
        assert_eq!(p.eval(&[rat(1, 2), int(1)]), rat(25, 4));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = UniPoly::new(vec![int(3), int(-1), rat(1, 2), int(2)]);
        let xs: Vec<_> = (0..4).map(int).collect();
        let ys: Vec<_> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(UniPoly::interpolate(&xs, &ys), p);
    }

    #[test]
    fn linear_division() {
        // (x-2)(x+3) = x^2 + x - 6
        let p = UniPoly::new(vec![int(-6), int(1), int(1)]);
        let (q, r) = p.div_linear(&int(2));
        assert_eq!(r, int(0));
        assert_eq!(q, UniPoly::new(vec![int(3), int(1)]));
    }
}
