//! Restriction of the points-on-a-line family to a stratum of the
//! discriminant where the points collide in blocks.
//!
//! Quantities of the full family that have poles along the stratum are used
//! only through block sums, where the singular terms cancel identically and
//! are dropped before evaluation.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::critalg::WAlgebra;
use crate::error::{Error, Result};
use crate::family::ArrangementFamily;
use crate::gaussmanin::GmOperators;
use crate::linalg::Matrix;
use crate::osflag::{contravariant_pairing, singular_subspace, v_vector, FlagVector};
use crate::scalar::{format_rational, Rational};

use super::{
    eta_and_beta, induced_multiplication_on_sing, period_map, potential_first_poly,
    potential_second_derivative,
};

#[derive(Clone, Debug, Serialize)]
pub struct StratumCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumReport {
    pub blocks: Vec<Vec<usize>>,
    pub x: Vec<String>,
    pub checks: Vec<StratumCheck>,
}

impl StratumReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// The family of block points with block weights, for a partition of the
/// index set of a points-on-a-line family.
pub fn stratum_family(
    family: &ArrangementFamily,
    blocks: &[Vec<usize>],
) -> Result<ArrangementFamily> {
    if family.k() != 1 || family.b().iter().any(|r| r != &family.b()[0]) {
        return Err(Error::Unsupported(
            "strata are implemented for points on a line".into(),
        ));
    }
    let mut seen = vec![false; family.n()];
    for &j in blocks.iter().flatten() {
        if j >= family.n() || std::mem::replace(&mut seen[j], true) {
            return Err(Error::Config(format!(
                "index {j} is out of range or repeated in the partition"
            )));
        }
    }
    if seen.iter().any(|s| !s) || blocks.iter().any(Vec::is_empty) || blocks.len() < 2 {
        return Err(Error::Config(
            "blocks must be nonempty and cover every index, with at least two blocks".into(),
        ));
    }
    let weights: Vec<Rational> = blocks
        .iter()
        .map(|blk| blk.iter().map(|&j| family.weight(j).clone()).sum())
        .collect();
    if let Some(l) = weights.iter().position(Zero::is_zero) {
        return Err(Error::Weights(format!("block {l} has zero total weight")));
    }
    ArrangementFamily::new(vec![family.b()[0].clone(); blocks.len()], weights)
}

fn embed_point(blocks: &[Vec<usize>], x: &[Rational], n: usize) -> Vec<Rational> {
    let mut z = vec![Rational::zero(); n];
    for (blk, xl) in blocks.iter().zip(x) {
        for &j in blk {
            z[j] = xl.clone();
        }
    }
    z
}

/// f: F_{ℓ,X} ↦ Σ_{j ∈ J_ℓ} F_j.
fn embed_vector(blocks: &[Vec<usize>], u: &FlagVector<Rational>, n: usize) -> FlagVector<Rational> {
    let mut out = vec![Rational::zero(); n];
    for (blk, c) in blocks.iter().zip(u.coeffs()) {
        for &j in blk {
            out[j] = c.clone();
        }
    }
    FlagVector::from_coeffs(out)
}

/// Σ_{j ∈ block} K_j at a point of the stratum, dropping circuits whose
/// λ-sum over the block vanishes.
fn block_operator(
    ops: &GmOperators,
    block: &[usize],
    z: &[Rational],
    dim: usize,
) -> Result<Matrix<Rational>> {
    let mut m = Matrix::zeros(dim, dim);
    for (c, l) in ops.circuits().iter().zip(ops.l_matrices()) {
        let lam: Rational = block.iter().filter_map(|&j| c.lambda_of(j)).sum();
        if lam.is_zero() {
            continue;
        }
        let f = c.value(z);
        if f.is_zero() {
            return Err(Error::BadFiber(
                "block operator has a pole at this point".into(),
            ));
        }
        m = m.add(&l.scale(&(lam / f)));
    }
    Ok(m)
}

/// v_i * v_j at a point where z_i ≠ z_j.
fn points_product(
    family: &ArrangementFamily,
    z: &[Rational],
    i: usize,
    j: usize,
) -> FlagVector<Rational> {
    let dz = &z[i] - &z[j];
    v_vector(family, &[j])
        .scale(&(family.weight(i) / &dz))
        .sub(&v_vector(family, &[i]).scale(&(family.weight(j) / &dz)))
}

/// (Σ_{i∈A} v_i) * (Σ_{j∈B} v_j) with within-block pole pairs cancelled.
fn block_product(
    family: &ArrangementFamily,
    z: &[Rational],
    a: &[usize],
    b: &[usize],
) -> FlagVector<Rational> {
    let mut out = FlagVector::zeros(family.n());
    if a == b {
        for &i in a {
            for m in (0..family.n()).filter(|m| !a.contains(m)) {
                out = out.sub(&points_product(family, z, i, m));
            }
        }
    } else {
        for &i in a {
            for &j in b {
                out = out.add(&points_product(family, z, i, j));
            }
        }
    }
    out
}

/// Σ_C coef_C Π_r Λ_r / f_C, where Λ_r is the λ-sum of C over the r-th
/// block; terms with some Λ_r = 0 vanish identically and are skipped.
fn block_third_derivative(
    family: &ArrangementFamily,
    z: &[Rational],
    blocks: &[&[usize]],
) -> Result<Rational> {
    let mut acc = Rational::zero();
    for c in family.circuits() {
        let prod: Rational = blocks
            .iter()
            .map(|blk| blk.iter().filter_map(|&j| c.lambda_of(j)).sum::<Rational>())
            .product();
        if prod.is_zero() {
            continue;
        }
        let f = c.value(z);
        if f.is_zero() {
            return Err(Error::BadFiber(
                "block derivative has a pole at this point".into(),
            ));
        }
        acc += family.weight_product(&c.indices) * prod / f;
    }
    Ok(acc)
}

/// Coefficient matrix of log(x_ℓ - x_k), ℓ < k, in the block-summed second
/// derivatives of P̃, as a map (ℓ, k, p, q) ↦ coefficient.
fn log_coefficients(family: &ArrangementFamily, blocks: &[Vec<usize>]) -> Vec<Rational> {
    let m = blocks.len();
    let block_of = |j: usize| {
        blocks
            .iter()
            .position(|b| b.contains(&j))
            .expect("partition covers J")
    };
    let mut out = vec![Rational::zero(); m * m * m * m];
    for c in family.circuits() {
        let (p, q) = (block_of(c.indices[0]), block_of(c.indices[1]));
        if p == q {
            continue;
        }
        let (p, q) = (p.min(q), p.max(q));
        for l in 0..m {
            for k in 0..m {
                let sl: Rational = blocks[l].iter().filter_map(|&j| c.lambda_of(j)).sum();
                let sk: Rational = blocks[k].iter().filter_map(|&j| c.lambda_of(j)).sum();
                out[((l * m + k) * m + p) * m + q] += family.weight_product(&c.indices) * sl * sk;
            }
        }
    }
    out
}

/// Exact compatibility checks between the family and its restriction to the
/// stratum of the partition, at the stratum point x.
pub fn strata_restriction_k1(
    family: &ArrangementFamily,
    blocks: &[Vec<usize>],
    x: &[Rational],
) -> Result<StratumReport> {
    let strat = stratum_family(family, blocks)?;
    strat.require_good_fiber(x)?;
    let n = family.n();
    let m = blocks.len();
    let z = embed_point(blocks, x, n);
    let mut checks = Vec::new();
    let mut push = |name: &str, holds: bool| {
        checks.push(StratumCheck {
            name: name.into(),
            holds,
        })
    };

    let v_x: Vec<FlagVector<Rational>> = (0..m).map(|l| v_vector(&strat, &[l])).collect();
    let embedded: Vec<FlagVector<Rational>> =
        v_x.iter().map(|v| embed_vector(blocks, v, n)).collect();
    let block_v = |l: usize| {
        blocks[l].iter().fold(FlagVector::zeros(n), |acc, &j| {
            acc.add(&v_vector(family, &[j]))
        })
    };
    push(
        "embedding of singular vectors",
        (0..m).all(|l| embedded[l] == block_v(l)),
    );

    let sing = singular_subspace(family)?;
    push(
        "embedding lands in Sing V",
        embedded.iter().all(|v| sing.contains(family, v)),
    );

    let strat_ops = GmOperators::new(&strat);
    let ops = GmOperators::new(family);
    let mut fk = true;
    for l in 0..m {
        let kx = strat_ops.k_operator(l, x);
        let kb = block_operator(&ops, &blocks[l], &z, n)?;
        for k in 0..m {
            let lhs = embed_vector(
                blocks,
                &FlagVector::from_coeffs(kx.mul_vec(v_x[k].coeffs())),
                n,
            );
            fk &= lhs.coeffs() == &kb.mul_vec(embedded[k].coeffs())[..];
        }
    }
    push("block sums of K_j", fk);

    let alg_x = WAlgebra::new(&strat, 0)?;
    let mut fm = true;
    for l in 0..m {
        for k in 0..m {
            let prod =
                induced_multiplication_on_sing(&alg_x, x, &v_x[l], &v_x[k], &Rational::one())?;
            fm &=
                embed_vector(blocks, &prod, n) == block_product(family, &z, &blocks[l], &blocks[k]);
        }
    }
    push("products of embedded singular vectors", fm);

    let sing_x = singular_subspace(&strat)?;
    let mut fh = true;
    for l in 0..m {
        for k in (0..m).filter(|&k| k != l) {
            let (i, j) = (blocks[l][0], blocks[k][0]);
            // h_i * h_j pulled back: values on f(b) for b in the stratum basis.
            let dz = &z[j] - &z[i];
            let pulled: Vec<Rational> = sing_x
                .basis()
                .iter()
                .map(|b| {
                    let u = embed_vector(blocks, b, n);
                    &u.coeffs()[j] / &dz - &u.coeffs()[i] / &dz
                })
                .collect();
            let to_vec = |vals: &[Rational]| -> Result<FlagVector<Rational>> {
                Ok(sing_x.combine(&sing_x.gram().solve_vec(vals)?))
            };
            let hx = |l: usize| -> Vec<Rational> {
                sing_x
                    .basis()
                    .iter()
                    .map(|b| b.coeffs()[l].clone())
                    .collect()
            };
            let prod = induced_multiplication_on_sing(
                &alg_x,
                x,
                &to_vec(&hx(l))?,
                &to_vec(&hx(k))?,
                &Rational::one(),
            )?;
            let direct: Vec<Rational> = sing_x
                .basis()
                .iter()
                .map(|b| contravariant_pairing(&strat, &prod, b))
                .collect();
            fh &= pulled == direct;
        }
    }
    push("pullback of dual products", fh);

    // η of the full family is z-independent for points on a line.
    let z_good = family.sample_good_point(0)?;
    let mut eta_ok = true;
    for l in 0..m {
        for k in 0..m {
            let eta_x = eta_and_beta(&strat, x, l, k, 0)?.residue;
            let mut sum = Rational::zero();
            for &i in &blocks[l] {
                for &j in &blocks[k] {
                    sum += eta_and_beta(family, &z_good, i, j, 0)?
                        .closed_form
                        .expect("points on a line");
                }
            }
            eta_ok &= eta_x == sum;
        }
    }
    push("η on block sums", eta_ok);

    let q_x = period_map(&strat, x, 0, &Rational::one())?;
    let q_full = crate::gaussmanin::eval_polys(
        &crate::gaussmanin::conformal_block(family, 0, &Rational::one())?,
        &z,
    );
    push("period map", embed_vector(blocks, &q_x, n) == q_full);
    let p_x = potential_first_poly(&strat, 0)?.eval(x);
    push(
        "first potential",
        p_x == potential_first_poly(family, 0)?.eval(&z),
    );

    let mut third = true;
    for l in 0..m {
        for k in 0..m {
            for r in 0..m {
                let lhs = potential_second_derivative(&strat, x, &[l, k, r], &Rational::one())?;
                let rhs =
                    block_third_derivative(family, &z, &[&blocks[l], &blocks[k], &blocks[r]])?;
                third &= lhs == rhs;
            }
        }
    }
    push("third derivatives of the second potential", third);
    let singletons: Vec<Vec<usize>> = (0..m).map(|l| vec![l]).collect();
    push(
        "logarithmic part of second derivatives",
        log_coefficients(&strat, &singletons) == log_coefficients(family, blocks),
    );

    Ok(StratumReport {
        blocks: blocks.to_vec(),
        x: x.iter().map(format_rational).collect(),
        checks,
    })
}
