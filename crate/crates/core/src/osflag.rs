//! Top-degree flag space V of a normal-crossing fiber, its contravariant form,
//! and the subspace of singular vectors.
//!
//! The standard basis F_T is indexed by the family's [`SubsetIndex`]. Vectors
//! are stored densely in that order; tuple access resolves permutation signs
//! and treats repeated or dependent tuples as zero.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::family::{sort_with_sign, subsets, ArrangementFamily, SubsetIndex};
use crate::linalg::{axpy, Matrix};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct FlagVector<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> FlagVector<S> {
    pub fn zeros(dim: usize) -> Self {
        FlagVector {
            coeffs: vec![S::zero(); dim],
        }
    }

    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        FlagVector { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// ±F_T for a tuple, or zero when the tuple repeats or is dependent.
    pub fn flag(index: &SubsetIndex, tuple: &[usize]) -> Self {
        let mut v = Self::zeros(index.len());
        v.add_flag(index, tuple, &S::one());
        v
    }

    /// Adds s·F_tuple.
    pub fn add_flag(&mut self, index: &SubsetIndex, tuple: &[usize], s: &S) {
        if let Some((pos, sign)) = index.resolve(tuple) {
            let cur = self.coeffs[pos].clone();
            self.coeffs[pos] = if sign > 0 {
                cur + s.clone()
            } else {
                cur - s.clone()
            };
        }
    }

    /// Coefficient of F_tuple, with the permutation sign applied.
    pub fn get(&self, index: &SubsetIndex, tuple: &[usize]) -> S {
        match index.resolve(tuple) {
            Some((pos, sign)) if sign > 0 => self.coeffs[pos].clone(),
            Some((pos, _)) => -self.coeffs[pos].clone(),
            None => S::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        FlagVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x.clone() + y.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        FlagVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x.clone() - y.clone())
                .collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        FlagVector {
            coeffs: self.coeffs.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    pub fn axpy(&mut self, s: &S, other: &Self) {
        axpy(&mut self.coeffs, s, &other.coeffs);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .map(Scalar::magnitude)
            .fold(0.0, f64::max)
    }

    pub fn iter_nonzero<'a>(
        &'a self,
        index: &'a SubsetIndex,
    ) -> impl Iterator<Item = (&'a [usize], &'a S)> + 'a {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(p, c)| (index.subset(p), c))
    }
}

impl FlagVector<Rational> {
    pub fn to_scalar<S: Scalar>(&self) -> FlagVector<S> {
        FlagVector {
            coeffs: self.coeffs.iter().map(S::from_rational).collect(),
        }
    }
}

/// Diagonal of the contravariant form on the standard basis: Π_{j∈T} a_j.
pub fn form_diagonal(family: &ArrangementFamily) -> Vec<Rational> {
    family
        .index()
        .subsets()
        .iter()
        .map(|t| family.weight_product(t))
        .collect()
}

pub fn contravariant_pairing<S: Scalar>(
    family: &ArrangementFamily,
    u: &FlagVector<S>,
    w: &FlagVector<S>,
) -> S {
    let diag = form_diagonal(family);
    u.coeffs
        .iter()
        .zip(&w.coeffs)
        .zip(&diag)
        .filter(|((x, y), _)| !x.is_zero() && !y.is_zero())
        .fold(S::zero(), |acc, ((x, y), d)| {
            acc + S::from_rational(d) * x.clone() * y.clone()
        })
}

/// Matrix of the singularity conditions: one row per (k-1)-subset T',
/// Σ_j a_j c_{j,T'} = 0.
pub fn singularity_conditions(family: &ArrangementFamily) -> Matrix<Rational> {
    let index = family.index();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for rest in subsets(family.n(), family.k() - 1) {
        let mut row = FlagVector::<Rational>::zeros(index.len());
        for j in (0..family.n()).filter(|j| !rest.contains(j)) {
            let mut tuple = vec![j];
            tuple.extend_from_slice(&rest);
            row.add_flag(index, &tuple, family.weight(j));
        }
        if !row.is_zero() {
            rows.push(row.into_coeffs());
        }
    }
    Matrix::from_fn(rows.len(), index.len(), |i, j| rows[i][j].clone())
}

#[derive(Clone, Debug)]
pub struct SingularSubspace {
    basis: Vec<FlagVector<Rational>>,
    gram: Matrix<Rational>,
    gram_inverse: Matrix<Rational>,
}

impl SingularSubspace {
    pub fn basis(&self) -> &[FlagVector<Rational>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gram(&self) -> &Matrix<Rational> {
        &self.gram
    }

    /// Basis vectors as the columns of a matrix.
    pub fn basis_matrix(&self) -> Matrix<Rational> {
        let cols: Vec<Vec<Rational>> = self.basis.iter().map(|b| b.coeffs().to_vec()).collect();
        Matrix::from_columns(self.basis.first().map_or(0, |b| b.dim()), &cols)
    }

    pub fn contains(&self, family: &ArrangementFamily, u: &FlagVector<Rational>) -> bool {
        singularity_conditions(family)
            .mul_vec(u.coeffs())
            .iter()
            .all(Zero::is_zero)
    }

    /// Coordinates of the S-orthogonal projection of u in the stored basis.
    pub fn coordinates<S: Scalar>(&self, family: &ArrangementFamily, u: &FlagVector<S>) -> Vec<S> {
        let pairings: Vec<S> = self
            .basis
            .iter()
            .map(|b| contravariant_pairing(family, &b.to_scalar::<S>(), u))
            .collect();
        self.gram_inverse.map(S::from_rational).mul_vec(&pairings)
    }

    pub fn combine<S: Scalar>(&self, coords: &[S]) -> FlagVector<S> {
        let dim = self.basis.first().map_or(0, |b| b.dim());
        let mut out = FlagVector::zeros(dim);
        for (b, c) in self.basis.iter().zip(coords) {
            out.axpy(c, &b.to_scalar());
        }
        out
    }

    pub fn project<S: Scalar>(
        &self,
        family: &ArrangementFamily,
        u: &FlagVector<S>,
    ) -> FlagVector<S> {
        self.combine(&self.coordinates(family, u))
    }
}

pub fn singular_subspace(family: &ArrangementFamily) -> Result<SingularSubspace> {
    let conditions = singularity_conditions(family);
    let dim = family.index().len();
    let kernel = if conditions.rows() == 0 {
        (0..dim)
            .map(|i| {
                FlagVector::<Rational>::flag(family.index(), family.index().subset(i)).into_coeffs()
            })
            .collect()
    } else {
        conditions.nullspace()
    };
    let basis: Vec<FlagVector<Rational>> =
        kernel.into_iter().map(FlagVector::from_coeffs).collect();
    let gram = Matrix::from_fn(basis.len(), basis.len(), |i, j| {
        contravariant_pairing(family, &basis[i], &basis[j])
    });
    let gram_inverse = gram.inverse().map_err(|_| {
        Error::Weights("contravariant form is degenerate on the singular subspace".into())
    })?;
    Ok(SingularSubspace {
        basis,
        gram,
        gram_inverse,
    })
}

pub fn orthogonal_projection<S: Scalar>(
    family: &ArrangementFamily,
    u: &FlagVector<S>,
) -> Result<FlagVector<S>> {
    Ok(singular_subspace(family)?.project(family, u))
}

/// The combinatorial singular vector v_{i_1..i_k}.
///
/// For k = 1 this is v_j = -F_j + (a_j/|a|) Σ_i F_i; for k ≥ 2 it is
/// F_T - Σ_m (a_{i_m}/|a|) Σ_j F_{T with i_m replaced by j}. The k = 1 sign is
/// opposite to the general pattern and both are kept.
pub fn v_vector(family: &ArrangementFamily, tuple: &[usize]) -> FlagVector<Rational> {
    assert_eq!(tuple.len(), family.k(), "v needs k indices");
    let index = family.index();
    let abs_a = family.weight_sum();
    let mut v = FlagVector::<Rational>::zeros(index.len());
    if family.k() == 1 {
        let j = tuple[0];
        v.add_flag(index, &[j], &-Rational::one());
        let s = family.weight(j) / abs_a;
        for i in 0..family.n() {
            v.add_flag(index, &[i], &s);
        }
        return v;
    }
    if sort_with_sign(tuple).is_none() {
        return v;
    }
    v.add_flag(index, tuple, &Rational::one());
    for m in 0..tuple.len() {
        let s = -(family.weight(tuple[m]) / abs_a);
        let mut t = tuple.to_vec();
        for j in 0..family.n() {
            t[m] = j;
            v.add_flag(index, &t, &s);
        }
    }
    v
}

/// Closed form of S(v_T, v_T') from the overlap pattern of T and T'.
pub fn gram_v(family: &ArrangementFamily, t1: &[usize], t2: &[usize]) -> Rational {
    let (Some((s1, e1)), Some((s2, e2))) = (sort_with_sign(t1), sort_with_sign(t2)) else {
        return Rational::zero();
    };
    let abs_a = family.weight_sum();
    let sign = Rational::from_integer((e1 * e2).into());
    if s1 == s2 {
        let outside: Rational = (0..family.n())
            .filter(|j| !s1.contains(j))
            .map(|j| family.weight(j))
            .sum();
        return sign * outside * family.weight_product(&s1) / abs_a;
    }
    let common: Vec<usize> = s1.iter().copied().filter(|j| s2.contains(j)).collect();
    if common.len() + 1 != family.k() {
        return Rational::zero();
    }
    let x = *s1.iter().find(|j| !common.contains(j)).unwrap();
    let y = *s2.iter().find(|j| !common.contains(j)).unwrap();
    let mut tx = common.clone();
    tx.push(x);
    let mut ty = common.clone();
    ty.push(y);
    let (_, px) = sort_with_sign(&tx).unwrap();
    let (_, py) = sort_with_sign(&ty).unwrap();
    let mut all = common;
    all.push(x);
    all.push(y);
    -sign * Rational::from_integer((px * py).into()) * family.weight_product(&all) / abs_a
}

/// Determinant of the Gram matrix of v_0..v_{n-2} for points on a line.
pub fn gram_det_points(family: &ArrangementFamily) -> Result<Rational> {
    if family.k() != 1 {
        return Err(Error::Unsupported(
            "Gram determinant closed form is for k = 1".into(),
        ));
    }
    let n = family.n();
    let vs: Vec<_> = (0..n - 1).map(|j| v_vector(family, &[j])).collect();
    Ok(Matrix::from_fn(n - 1, n - 1, |i, j| {
        contravariant_pairing(family, &vs[i], &vs[j])
    })
    .det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn points(a: &[i64]) -> ArrangementFamily {
        ArrangementFamily::new(
            vec![vec![int(1)]; a.len()],
            a.iter().map(|&x| int(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn v_vectors_are_singular_for_points() {
        let f = points(&[1, 2, 3]);
        let sing = singular_subspace(&f).unwrap();
        assert_eq!(sing.dim(), 2);
        let v0 = v_vector(&f, &[0]);
        assert!(sing.contains(&f, &v0));
        assert_eq!(v0.coeffs(), &[rat(-5, 6), rat(1, 6), rat(1, 6)]);
    }

    #[test]
    fn gram_determinant_small() {
        let f = points(&[1, 1, 1]);
        assert_eq!(gram_det_points(&f).unwrap(), rat(1, 3));
    }
}
