//! Translated families of affine arrangements f_j = z_j + Σ_m b_j^m t_m.
//!
//! Indices are zero-based throughout the crate: hyperplanes are `0..n`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{format_rational, parse_rational, rat, Rational, Scalar};

/// A minimal dependent set of linear parts with its relation Σ λ_i g_i = 0,
/// normalized so that λ at the smallest index is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub indices: Vec<usize>,
    pub lambda: Vec<Rational>,
}

impl Circuit {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn lambda_of(&self, j: usize) -> Option<&Rational> {
        self.indices
            .iter()
            .position(|&i| i == j)
            .map(|p| &self.lambda[p])
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    /// f_C(z) = Σ λ_i z_i, the discriminant form of this circuit.
    pub fn value<S: Scalar>(&self, z: &[S]) -> S {
        self.indices
            .iter()
            .zip(&self.lambda)
            .fold(S::zero(), |acc, (&i, l)| {
                acc + S::from_rational(l) * z[i].clone()
            })
    }
}

/// Sorts a tuple of distinct indices, returning the sorted tuple and the sign
/// of the sorting permutation; `None` if an index repeats.
pub fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = tuple.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// All sorted r-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Lexicographic catalogue of the independent k-subsets.
#[derive(Clone, Debug)]
pub struct SubsetIndex {
    subsets: Vec<Vec<usize>>,
    positions: HashMap<Vec<usize>, usize>,
}

impl SubsetIndex {
    pub fn new(subsets: Vec<Vec<usize>>) -> Self {
        let positions = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        SubsetIndex { subsets, positions }
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn subset(&self, pos: usize) -> &[usize] {
        &self.subsets[pos]
    }

    pub fn position(&self, sorted: &[usize]) -> Option<usize> {
        self.positions.get(sorted).copied()
    }

    /// Position and sign of an unsorted tuple; `None` for repeated indices or
    /// dependent sets, whose flag or form vanishes.
    pub fn resolve(&self, tuple: &[usize]) -> Option<(usize, i32)> {
        let (sorted, sign) = sort_with_sign(tuple)?;
        self.position(&sorted).map(|p| (p, sign))
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct FamilyConfig {
    pub k: usize,
    pub n: usize,
    pub b: Vec<Vec<Value>>,
    pub weights: Vec<Value>,
    #[serde(default)]
    pub z: Option<Vec<Value>>,
}

fn value_to_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(num) => parse_rational(&num.to_string()),
        other => Err(Error::Config(format!("expected a rational, found {other}"))),
    }
}

impl FamilyConfig {
    pub fn from_json(doc: &str) -> Result<Self> {
        serde_json::from_str(doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn family(&self) -> Result<ArrangementFamily> {
        if self.b.len() != self.n {
            return Err(Error::Config(format!(
                "b has {} rows, expected n = {}",
                self.b.len(),
                self.n
            )));
        }
        if self.weights.len() != self.n {
            return Err(Error::Config(format!(
                "{} weights given, expected n = {}",
                self.weights.len(),
                self.n
            )));
        }
        let mut b = Vec::with_capacity(self.n);
        for (j, row) in self.b.iter().enumerate() {
            if row.len() != self.k {
                return Err(Error::Config(format!(
                    "row {j} of b has length {}, expected k = {}",
                    row.len(),
                    self.k
                )));
            }
            b.push(
                row.iter()
                    .map(value_to_rational)
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let a = self
            .weights
            .iter()
            .map(value_to_rational)
            .collect::<Result<Vec<_>>>()?;
        ArrangementFamily::new(b, a)
    }

    pub fn base_point(&self) -> Result<Option<Vec<Rational>>> {
        let Some(z) = &self.z else { return Ok(None) };
        if z.len() != self.n {
            return Err(Error::Config(format!(
                "z has length {}, expected n = {}",
                z.len(),
                self.n
            )));
        }
        Ok(Some(
            z.iter()
                .map(value_to_rational)
                .collect::<Result<Vec<_>>>()?,
        ))
    }
}

pub fn load_family(doc: &str) -> Result<ArrangementFamily> {
    FamilyConfig::from_json(doc)?.family()
}

#[derive(Clone, Debug)]
pub struct ArrangementFamily {
    k: usize,
    n: usize,
    b: Vec<Vec<Rational>>,
    a: Vec<Rational>,
    weight_sum: Rational,
    minors: HashMap<Vec<usize>, Rational>,
    generic: bool,
    circuits: Vec<Circuit>,
    index: SubsetIndex,
}

impl ArrangementFamily {
    pub fn new(b: Vec<Vec<Rational>>, a: Vec<Rational>) -> Result<Self> {
        let n = b.len();
        let k = b.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if n <= k {
            return Err(Error::Config(format!("need n > k, got n = {n}, k = {k}")));
        }
        if b.iter().any(|row| row.len() != k) {
            return Err(Error::Config("rows of b have unequal length".into()));
        }
        if a.len() != n {
            return Err(Error::Config(format!(
                "{} weights for {n} hyperplanes",
                a.len()
            )));
        }
        if let Some(j) = b.iter().position(|row| row.iter().all(Zero::is_zero)) {
            return Err(Error::Config(format!("row {j} of b is zero")));
        }
        if let Some(j) = a.iter().position(Zero::is_zero) {
            return Err(Error::Weights(format!("a_{j} = 0")));
        }
        let weight_sum: Rational = a.iter().sum();
        if weight_sum.is_zero() {
            return Err(Error::Weights("|a| = 0".into()));
        }

        let mut minors = HashMap::new();
        let mut independent = Vec::new();
        for s in subsets(n, k) {
            let d = Matrix::from_fn(k, k, |r, c| b[s[r]][c].clone()).det();
            if !d.is_zero() {
                independent.push(s.clone());
            }
            minors.insert(s, d);
        }
        let generic = independent.len() == minors.len();
        let circuits = find_circuits(&b, k);
        let family = ArrangementFamily {
            k,
            n,
            b,
            a,
            weight_sum,
            minors,
            generic,
            circuits,
            index: SubsetIndex::new(independent),
        };
        family.check_edges_at_infinity()?;
        Ok(family)
    }

    /// Non-generic families acquire extra dense edges at infinity: a flat X of
    /// rank below k spanned by a circuit meets the hyperplane at infinity with
    /// weight a_X - |a|, which must not vanish.
    fn check_edges_at_infinity(&self) -> Result<()> {
        for c in self.circuits.iter().filter(|c| c.len() <= self.k) {
            let rank = self.rank_of(&c.indices);
            let closure: Vec<usize> = (0..self.n)
                .filter(|j| {
                    let mut s = c.indices.clone();
                    if !s.contains(j) {
                        s.push(*j);
                    }
                    self.rank_of(&s) == rank
                })
                .collect();
            let a_x: Rational = closure.iter().map(|&j| &self.a[j]).sum();
            if a_x == self.weight_sum {
                return Err(Error::Weights(format!(
                    "dense edge at infinity over {closure:?} has zero weight"
                )));
            }
        }
        Ok(())
    }

    /// Rank of the linear parts g_j for j in `set`.
    pub fn rank_of(&self, set: &[usize]) -> usize {
        Matrix::from_fn(set.len(), self.k, |r, c| self.b[set[r]][c].clone()).rank()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> &[Vec<Rational>] {
        &self.b
    }

    pub fn weights(&self) -> &[Rational] {
        &self.a
    }

    pub fn weight(&self, j: usize) -> &Rational {
        &self.a[j]
    }

    /// |a| = Σ a_j.
    pub fn weight_sum(&self) -> &Rational {
        &self.weight_sum
    }

    pub fn is_generic(&self) -> bool {
        self.generic
    }

    pub fn require_generic(&self) -> Result<()> {
        if self.generic {
            Ok(())
        } else {
            Err(Error::NotGeneric("some k x k minor vanishes".into()))
        }
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn index(&self) -> &SubsetIndex {
        &self.index
    }

    /// The k x k minor with rows taken in the given order; zero on repeats.
    pub fn minor(&self, indices: &[usize]) -> Rational {
        assert_eq!(indices.len(), self.k, "minor needs exactly k indices");
        match sort_with_sign(indices) {
            None => Rational::zero(),
            Some((sorted, sign)) => {
                let d = &self.minors[&sorted];
                if sign > 0 {
                    d.clone()
                } else {
                    -d.clone()
                }
            }
        }
    }

    /// Product of weights over a set of indices.
    pub fn weight_product(&self, indices: &[usize]) -> Rational {
        indices
            .iter()
            .fold(Rational::one(), |acc, &j| acc * &self.a[j])
    }

    /// Coefficients in z of the generic discriminant form
    /// f_{i_0..i_k} = Σ_m (-1)^m z_{i_m} d_{i_0..î_m..i_k} for a (k+1)-tuple.
    pub fn generic_form(&self, tuple: &[usize]) -> Vec<Rational> {
        assert_eq!(tuple.len(), self.k + 1);
        let mut coeffs = vec![Rational::zero(); self.n];
        for m in 0..tuple.len() {
            let rest: Vec<usize> = tuple
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != m)
                .map(|(_, &i)| i)
                .collect();
            let d = self.minor(&rest);
            if m % 2 == 0 {
                coeffs[tuple[m]] += d;
            } else {
                coeffs[tuple[m]] -= d;
            }
        }
        coeffs
    }

    pub fn generic_form_value<S: Scalar>(&self, tuple: &[usize], z: &[S]) -> S {
        self.generic_form(tuple)
            .iter()
            .zip(z)
            .filter(|(c, _)| !c.is_zero())
            .fold(S::zero(), |acc, (c, zi)| {
                acc + S::from_rational(c) * zi.clone()
            })
    }

    /// f_j(t) = z_j + Σ_m b_j^m t_m.
    pub fn f_value<S: Scalar>(&self, j: usize, z: &[S], t: &[S]) -> S {
        self.b[j].iter().zip(t).fold(z[j].clone(), |acc, (b, tm)| {
            acc + S::from_rational(b) * tm.clone()
        })
    }

    pub fn is_good_fiber<S: Scalar>(&self, z: &[S]) -> bool {
        z.len() == self.n && self.circuits.iter().all(|c| !c.value(z).is_zero())
    }

    /// Smallest |f_C(z)| over circuits, the distance-like guard for flows.
    pub fn discriminant_margin<S: Scalar>(&self, z: &[S]) -> f64 {
        self.circuits
            .iter()
            .map(|c| c.value(z).magnitude())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn require_good_fiber<S: Scalar>(&self, z: &[S]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::Dimension(format!(
                "base point of length {}, n = {}",
                z.len(),
                self.n
            )));
        }
        match self.circuits.iter().find(|c| c.value(z).is_zero()) {
            Some(c) => Err(Error::BadFiber(format!(
                "f_C(z) = 0 for C = {:?}",
                c.indices
            ))),
            None => Ok(()),
        }
    }

    /// Seeded small-rational base point off the discriminant.
    pub fn sample_good_point(&self, seed: u64) -> Result<Vec<Rational>> {
        const ATTEMPTS: usize = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..ATTEMPTS {
            let z: Vec<Rational> = (0..self.n)
                .map(|_| random_rational(&mut rng, 12, 6))
                .collect();
            if self.is_good_fiber(&z) {
                return Ok(z);
            }
        }
        Err(Error::Sampling(ATTEMPTS))
    }

    pub fn describe(&self) -> String {
        let rows: Vec<String> = self
            .b
            .iter()
            .map(|r| {
                format!(
                    "[{}]",
                    r.iter().map(format_rational).collect::<Vec<_>>().join(", ")
                )
            })
            .collect();
        format!(
            "k={} n={} b=[{}] a=[{}]",
            self.k,
            self.n,
            rows.join(", "),
            self.a
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

fn find_circuits(b: &[Vec<Rational>], k: usize) -> Vec<Circuit> {
    let n = b.len();
    let mut out = Vec::new();
    for r in 2..=(k + 1).min(n) {
        for set in subsets(n, r) {
            // Columns are the linear parts of the chosen hyperplanes.
            let m = Matrix::from_fn(k, r, |row, col| b[set[col]][row].clone());
            let kernel = m.nullspace();
            if kernel.len() != 1 || kernel[0].iter().any(Zero::is_zero) {
                continue;
            }
            let lead = kernel[0][0].clone();
            let lambda = kernel[0].iter().map(|x| x / &lead).collect();
            out.push(Circuit {
                indices: set,
                lambda,
            });
        }
    }
    out
}

/// p/q with |p| ≤ max_num and 1 ≤ q ≤ max_den.
pub fn random_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    let p = rng.random_range(-max_num..=max_num);
    let q = rng.random_range(1..=max_den);
    rat(p, q)
}

/// Positive weights p/q with 1 ≤ p ≤ max_num, 1 ≤ q ≤ max_den.
pub fn random_positive_weights(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| rat(rng.random_range(1..=9), rng.random_range(1..=4)))
        .collect()
}
