//! Gauss-Manin operators K_j(z) on the flag space, their exact structural
//! checks, the conformal-block section and flat-section transport.

mod flow;

pub use flow::{
    dopri5, flow_flat_section, CirclePath, ExtraRates, FlowOptions, GmTrajectory, ParamPath,
    Polyline, TrajectorySample,
};

use num_traits::{One, Zero};

use crate::critalg::WAlgebra;
use crate::error::{Error, Result};
use crate::family::{sort_with_sign, ArrangementFamily, Circuit};
use crate::linalg::Matrix;
use crate::osflag::{
    form_diagonal, singular_subspace, singularity_conditions, v_vector, FlagVector,
};
use crate::poly::{Poly, UniPoly};
use crate::scalar::{factorial, int, Rational, Scalar};

/// The circuit operator L_C on V.
///
/// For C = (i_1..i_r), a basis flag F_T with T ∩ C = C minus i_m is written
/// ±F(i_1..î_m..i_r, s..) and sent to (-1)^m Σ_l (-1)^l a_{i_l} F(i_1..î_l..i_r, s..);
/// flags meeting C in fewer points are killed.
pub fn l_c_matrix(family: &ArrangementFamily, circuit: &Circuit) -> Matrix<Rational> {
    let index = family.index();
    let c = &circuit.indices;
    let r = c.len();
    let mut m = Matrix::zeros(index.len(), index.len());
    for (col, t) in index.subsets().iter().enumerate() {
        let missing: Vec<usize> = (0..r).filter(|&p| !t.contains(&c[p])).collect();
        if missing.len() != 1 {
            continue;
        }
        let mpos = missing[0];
        let outside: Vec<usize> = t.iter().copied().filter(|j| !c.contains(j)).collect();
        let tuple_of = |skip: usize| {
            let mut tup: Vec<usize> = (0..r).filter(|&p| p != skip).map(|p| c[p]).collect();
            tup.extend_from_slice(&outside);
            tup
        };
        let (_, sign_t) = sort_with_sign(&tuple_of(mpos)).expect("distinct");
        for (l, &cl) in c.iter().enumerate() {
            let Some((pos, sign_l)) = index.resolve(&tuple_of(l)) else {
                continue;
            };
            let parity = if (mpos + l).is_multiple_of(2) { 1 } else { -1 };
            let coef = family.weight(cl) * int((sign_t * sign_l * parity).into());
            m[(pos, col)] += coef;
        }
    }
    m
}

/// The circuit operators of a family, computed once.
#[derive(Clone, Debug)]
pub struct GmOperators {
    circuits: Vec<Circuit>,
    l: Vec<Matrix<Rational>>,
}

impl GmOperators {
    pub fn new(family: &ArrangementFamily) -> Self {
        let circuits = family.circuits().to_vec();
        let l = circuits.iter().map(|c| l_c_matrix(family, c)).collect();
        GmOperators { circuits, l }
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn l_matrices(&self) -> &[Matrix<Rational>] {
        &self.l
    }

    /// K_j(z) = Σ_C λ_j^C / f_C(z) L_C.
    pub fn k_operator<S: Scalar>(&self, j: usize, z: &[S]) -> Matrix<S> {
        let dim = self.l.first().map_or(0, Matrix::rows);
        let mut out = Matrix::zeros(dim, dim);
        for (c, l) in self.circuits.iter().zip(&self.l) {
            if let Some(lam) = c.lambda_of(j) {
                let s = S::from_rational(lam) / c.value(z);
                out = out.add(&l.map(S::from_rational).scale(&s));
            }
        }
        out
    }

    /// Σ_j w_j K_j(z) for a direction w: Σ_C f_C(w)/f_C(z) L_C.
    pub fn directional<S: Scalar>(&self, z: &[S], w: &[S]) -> Matrix<S> {
        let dim = self.l.first().map_or(0, Matrix::rows);
        let mut out = Matrix::zeros(dim, dim);
        for (c, l) in self.circuits.iter().zip(&self.l) {
            let s = c.value(w) / c.value(z);
            if !s.is_zero() {
                out = out.add(&l.map(S::from_rational).scale(&s));
            }
        }
        out
    }

    /// ∂K_j/∂z_i = -Σ_C λ_j λ_i / f_C^2 L_C.
    pub fn k_derivative(&self, j: usize, i: usize, z: &[Rational]) -> Matrix<Rational> {
        let dim = self.l.first().map_or(0, Matrix::rows);
        let mut out = Matrix::zeros(dim, dim);
        for (c, l) in self.circuits.iter().zip(&self.l) {
            if let (Some(lj), Some(li)) = (c.lambda_of(j), c.lambda_of(i)) {
                let f = c.value(z);
                out = out.add(&l.scale(&(-(lj * li) / (&f * &f))));
            }
        }
        out
    }
}

pub fn k_operator<S: Scalar>(family: &ArrangementFamily, j: usize, z: &[S]) -> Matrix<S> {
    GmOperators::new(family).k_operator(j, z)
}

#[derive(Clone, Debug, Default)]
pub struct StructuralReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Exact S-symmetry of every K_j(z) and invariance of Sing V.
pub fn check_symmetry_and_invariance(
    family: &ArrangementFamily,
    z: &[Rational],
) -> Result<StructuralReport> {
    family.require_good_fiber(z)?;
    let ops = GmOperators::new(family);
    let diag = form_diagonal(family);
    let dim = diag.len();
    let d = Matrix::from_fn(dim, dim, |i, j| {
        if i == j {
            diag[i].clone()
        } else {
            Rational::zero()
        }
    });
    let conditions = singularity_conditions(family);
    let basis = singular_subspace(family)?.basis_matrix();
    let mut report = StructuralReport::default();
    for j in 0..family.n() {
        let k = ops.k_operator(j, z);
        let dk = d.mul(&k);
        report.record(dk == dk.transpose(), || format!("K_{j} is not S-symmetric"));
        if conditions.rows() > 0 && basis.cols() > 0 {
            report.record(conditions.mul(&k).mul(&basis).is_zero(), || {
                format!("K_{j} does not preserve Sing V")
            });
        }
    }
    Ok(report)
}

/// Exact vanishing of ∂_i K_j - ∂_j K_i on V and of [K_i, K_j] on Sing V.
pub fn check_flatness(family: &ArrangementFamily, z: &[Rational]) -> Result<StructuralReport> {
    family.require_good_fiber(z)?;
    let ops = GmOperators::new(family);
    let basis = singular_subspace(family)?.basis_matrix();
    let ks: Vec<Matrix<Rational>> = (0..family.n()).map(|j| ops.k_operator(j, z)).collect();
    let mut report = StructuralReport::default();
    for i in 0..family.n() {
        for j in i + 1..family.n() {
            let curl = ops.k_derivative(j, i, z).sub(&ops.k_derivative(i, j, z));
            report.record(curl.is_zero(), || {
                format!("curl of K at ({i},{j}) is nonzero")
            });
            let comm = ks[i].mul(&ks[j]).sub(&ks[j].mul(&ks[i]));
            report.record(comm.mul(&basis).is_zero(), || {
                format!("[K_{i}, K_{j}] is nonzero on Sing V")
            });
        }
    }
    Ok(report)
}

/// Standard-basis coordinates of the conformal block {1}(z) as polynomials.
///
/// Points on a line with equal slopes use (1/|a|) Σ z_j v_j; generic lines use
/// |a|^{-2} Σ f_{i,j,i0}^2 / (d_{ij} d_{j,i0} d_{i0,i}) v_{ij}; the general case
/// expands the closed-form identity element through ν. Everything is scaled by c.
pub fn conformal_block(
    family: &ArrangementFamily,
    anchor: usize,
    c: &Rational,
) -> Result<Vec<Poly>> {
    family.require_generic()?;
    let n = family.n();
    let dim = family.index().len();
    let mut coords = vec![Poly::zero(n); dim];
    let mut add_term = |coeff: &Poly, v: &FlagVector<Rational>| {
        for (pos, x) in v.coeffs().iter().enumerate() {
            if !x.is_zero() {
                coords[pos] = coords[pos].add(&coeff.scale(x));
            }
        }
    };
    let abs_a = family.weight_sum().clone();
    let equal_slopes = family.b().iter().all(|r| r == &family.b()[0]);
    if family.k() == 1 && equal_slopes {
        for j in 0..n {
            add_term(
                &Poly::var(n, j).scale(&(Rational::one() / &abs_a)),
                &v_vector(family, &[j]),
            );
        }
    } else if family.k() == 2 {
        for i in (0..n).filter(|&i| i != anchor) {
            for j in (i + 1..n).filter(|&j| j != anchor) {
                let f = Poly::linear(&family.generic_form(&[i, j, anchor]), Rational::zero());
                let denom =
                    family.minor(&[i, j]) * family.minor(&[j, anchor]) * family.minor(&[anchor, i]);
                let s = Rational::one() / (denom * &abs_a * &abs_a);
                add_term(&f.pow(2).scale(&s), &v_vector(family, &[i, j]));
            }
        }
    } else {
        let alg = WAlgebra::new(family, anchor)?;
        for (t, p) in alg.basis().iter().zip(alg.identity_polys()) {
            add_term(&p, &v_vector(family, t));
        }
    }
    Ok(coords.into_iter().map(|p| p.scale(c)).collect())
}

pub fn eval_polys(polys: &[Poly], z: &[Rational]) -> FlagVector<Rational> {
    FlagVector::from_coeffs(polys.iter().map(|p| p.eval(z)).collect())
}

/// Exact check of (|a|/k) ∂_j{1} = K_j{1} for every j, plus homogeneity of
/// degree k by interpolation along z ↦ λz at k+2 scalings.
pub fn check_conformal_block(
    family: &ArrangementFamily,
    z: &[Rational],
    anchor: usize,
) -> Result<StructuralReport> {
    family.require_good_fiber(z)?;
    let k = family.k();
    let block = conformal_block(family, anchor, &Rational::one())?;
    let ops = GmOperators::new(family);
    let q = eval_polys(&block, z);
    let scale = family.weight_sum() / int(k as i64);
    let mut report = StructuralReport::default();
    for j in 0..family.n() {
        let lhs: Vec<Rational> = block
            .iter()
            .map(|p| p.derivative(j).eval(z) * &scale)
            .collect();
        let rhs = ops.k_operator(j, z).mul_vec(q.coeffs());
        report.record(lhs == rhs, || {
            format!("conformal block equation fails for j = {j}")
        });
    }
    let lambdas: Vec<Rational> = (1..=(k as i64 + 2)).map(int).collect();
    for (pos, p) in block.iter().enumerate() {
        let values: Vec<Rational> = lambdas
            .iter()
            .map(|l| p.eval(&z.iter().map(|x| x * l).collect::<Vec<_>>()))
            .collect();
        let interp = UniPoly::interpolate(&lambdas, &values);
        let mut expected = vec![Rational::zero(); k + 1];
        expected[k] = q.coeffs()[pos].clone();
        report.record(interp == UniPoly::new(expected), || {
            format!("coordinate {pos} of {{1}} is not homogeneous of degree {k}")
        });
    }
    Ok(report)
}

/// ∂^r{1}/∂z_{m_1}..∂z_{m_r} at z by symbolic differentiation, checked
/// against k(k-1)..(k-r+1)/|a|^r · ν(e_{m_1} * .. * e_{m_r}).
pub fn derivative_sections(
    family: &ArrangementFamily,
    z: &[Rational],
    ms: &[usize],
    anchor: usize,
) -> Result<FlagVector<Rational>> {
    family.require_good_fiber(z)?;
    let block = conformal_block(family, anchor, &Rational::one())?;
    let symbolic: Vec<Rational> = block
        .iter()
        .map(|p| {
            ms.iter()
                .fold(p.clone(), |acc, &m| acc.derivative(m))
                .eval(z)
        })
        .collect();
    let symbolic = FlagVector::from_coeffs(symbolic);
    let k = family.k();
    let r = ms.len();
    let expected = if r > k {
        FlagVector::zeros(family.index().len())
    } else {
        let alg = WAlgebra::new(family, anchor)?;
        let falling = Rational::from_integer(factorial(k as u32) / factorial((k - r) as u32));
        let scale = falling / num_traits::pow(family.weight_sum().clone(), r);
        alg.nu(&alg.monomial(ms, z)).scale(&scale)
    };
    if symbolic != expected {
        return Err(Error::Identity(format!(
            "derivative section for {ms:?} disagrees with the algebra side"
        )));
    }
    Ok(symbolic)
}

/// Flatness of a derivative section at κ = |a|/(k-r): (|a|/(k-r)) ∂_j D = K_j D.
pub fn check_derivative_section_flatness(
    family: &ArrangementFamily,
    z: &[Rational],
    ms: &[usize],
    anchor: usize,
) -> Result<StructuralReport> {
    let k = family.k();
    if ms.len() >= k {
        return Err(Error::Unsupported(
            "derivative sections of order ≥ k have no special κ".into(),
        ));
    }
    let block = conformal_block(family, anchor, &Rational::one())?;
    let section: Vec<Poly> = block
        .iter()
        .map(|p| ms.iter().fold(p.clone(), |acc, &m| acc.derivative(m)))
        .collect();
    let ops = GmOperators::new(family);
    let value = eval_polys(&section, z);
    let scale = family.weight_sum() / int((k - ms.len()) as i64);
    let mut report = StructuralReport::default();
    for j in 0..family.n() {
        let lhs: Vec<Rational> = section
            .iter()
            .map(|p| p.derivative(j).eval(z) * &scale)
            .collect();
        let rhs = ops.k_operator(j, z).mul_vec(value.coeffs());
        report.record(lhs == rhs, || {
            format!("derivative section {ms:?} not flat in direction {j}")
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    /// Each L_C has rank one and squares to (Σ_{j∈C} a_j) L_C.
    #[test]
    fn circuit_operators_are_scaled_projections() {
        let b = vec![
            vec![int(1), int(0)],
            vec![int(0), int(1)],
            vec![int(1), int(1)],
            vec![int(1), int(-1)],
        ];
        let f = ArrangementFamily::new(b, vec![int(1), rat(1, 2), int(3), int(2)]).unwrap();
        for c in f.circuits() {
            let l = l_c_matrix(&f, c);
            let a_c: Rational = c.indices.iter().map(|&j| f.weight(j)).sum();
            assert_eq!(l.rank(), 1);
            assert_eq!(l.mul(&l), l.scale(&a_c));
        }
    }
}
