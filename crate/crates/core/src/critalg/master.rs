//! The master function Φ = Σ a_j log f_j on one fiber and its critical points.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::family::{subsets, ArrangementFamily};
use crate::linalg::Matrix;
use crate::poly::{Poly, UniPoly};
use crate::roots::poly_roots;
use crate::scalar::{int, to_complex, Complex, Rational};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
pub const DEDUP_TOL: f64 = 1e-8;
pub const DEGENERATE_HESSIAN: f64 = 1e-10;

pub struct MasterFunction<'a> {
    family: &'a ArrangementFamily,
    z: Vec<Complex>,
}

impl<'a> MasterFunction<'a> {
    pub fn new(family: &'a ArrangementFamily, z: &[Complex]) -> Self {
        MasterFunction {
            family,
            z: z.to_vec(),
        }
    }

    pub fn from_rational(family: &'a ArrangementFamily, z: &[Rational]) -> Self {
        Self::new(family, &z.iter().map(to_complex).collect::<Vec<_>>())
    }

    pub fn family(&self) -> &ArrangementFamily {
        self.family
    }

    pub fn z(&self) -> &[Complex] {
        &self.z
    }

    pub fn f(&self, j: usize, t: &[Complex]) -> Complex {
        self.family.f_value(j, &self.z, t)
    }

    /// Principal-branch value of Φ.
    pub fn value(&self, t: &[Complex]) -> Complex {
        (0..self.family.n())
            .map(|j| to_complex(self.family.weight(j)) * self.f(j, t).ln())
            .sum()
    }

    pub fn gradient(&self, t: &[Complex]) -> Vec<Complex> {
        let k = self.family.k();
        let mut g = vec![Complex::zero(); k];
        for j in 0..self.family.n() {
            let w = to_complex(self.family.weight(j)) / self.f(j, t);
            for (m, gm) in g.iter_mut().enumerate() {
                *gm += w * to_complex(&self.family.b()[j][m]);
            }
        }
        g
    }

    pub fn hessian(&self, t: &[Complex]) -> Matrix<Complex> {
        let k = self.family.k();
        let mut h = Matrix::zeros(k, k);
        for j in 0..self.family.n() {
            let fj = self.f(j, t);
            let w = -to_complex(self.family.weight(j)) / (fj * fj);
            let bj: Vec<Complex> = self.family.b()[j].iter().map(to_complex).collect();
            for r in 0..k {
                for c in 0..k {
                    h[(r, c)] += w * bj[r] * bj[c];
                }
            }
        }
        h
    }

    pub fn hessian_det(&self, t: &[Complex]) -> Complex {
        self.hessian(t).det()
    }

    fn residual(&self, t: &[Complex]) -> f64 {
        self.gradient(t)
            .iter()
            .map(|g| g.norm())
            .fold(0.0, f64::max)
    }

    fn min_f(&self, t: &[Complex]) -> f64 {
        (0..self.family.n())
            .map(|j| self.f(j, t).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Damped Newton on the gradient.
    pub fn refine(&self, t0: &[Complex]) -> Option<Vec<Complex>> {
        let mut t = t0.to_vec();
        let mut res = self.residual(&t);
        for _ in 0..NEWTON_MAX_ITER {
            if res <= NEWTON_TOL * (1.0 + self.scale()) {
                break;
            }
            let g = self.gradient(&t);
            let step = self.hessian(&t).solve_vec(&g).ok()?;
            let mut damping = 1.0;
            loop {
                let trial: Vec<Complex> =
                    t.iter().zip(&step).map(|(x, s)| x - s * damping).collect();
                if self.min_f(&trial) > 0.0 {
                    let r = self.residual(&trial);
                    if r < res || damping < 1e-3 {
                        t = trial;
                        res = r;
                        break;
                    }
                }
                damping *= 0.5;
                if damping < 1e-6 {
                    return None;
                }
            }
        }
        (res.is_finite() && self.min_f(&t) > 1e-12).then_some(t)
    }

    fn scale(&self) -> f64 {
        self.family
            .weights()
            .iter()
            .map(|a| to_complex(a).norm())
            .sum::<f64>()
    }
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub t: Vec<Complex>,
    pub hessian_det: Complex,
    /// max |∂Φ/∂t_i| after refinement.
    pub residual: f64,
}

/// Critical points of Φ on a good fiber with rational base point.
///
/// k = 1 uses the numerator polynomial of Φ'; k = 2 eliminates one
/// coordinate by a resultant computed exactly through evaluation and
/// interpolation, divides out the vertices of the arrangement, and
/// back-substitutes. Every candidate is polished by Newton's method.
pub fn solve_critical(family: &ArrangementFamily, z: &[Rational]) -> Result<Vec<CriticalPoint>> {
    family.require_good_fiber(z)?;
    let master = MasterFunction::from_rational(family, z);
    let candidates = match family.k() {
        1 => candidates_k1(family, z),
        2 => candidates_k2(family, z)?,
        k => {
            return Err(Error::Unsupported(format!(
                "critical point solving for k = {k}"
            )))
        }
    };
    let mut points: Vec<CriticalPoint> = Vec::new();
    for c in candidates {
        let Some(t) = master.refine(&c) else { continue };
        if points
            .iter()
            .any(|p| dist(&p.t, &t) <= DEDUP_TOL * (1.0 + norm(&t)))
        {
            continue;
        }
        let residual = master.residual(&t);
        if residual > 1e-8 * (1.0 + master.scale()) {
            continue;
        }
        let hessian_det = master.hessian_det(&t);
        points.push(CriticalPoint {
            t,
            hessian_det,
            residual,
        });
    }
    points.sort_by(|p, q| {
        let key = |c: &CriticalPoint| c.t.iter().map(|x| (x.re, x.im)).collect::<Vec<_>>();
        key(p)
            .partial_cmp(&key(q))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(points)
}

/// Errors if any critical point is degenerate.
pub fn require_nondegenerate(points: &[CriticalPoint]) -> Result<()> {
    match points
        .iter()
        .find(|p| p.hessian_det.norm() < DEGENERATE_HESSIAN)
    {
        Some(p) => Err(Error::Numeric(format!(
            "degenerate critical point, |Hess| = {:e}",
            p.hessian_det.norm()
        ))),
        None => Ok(()),
    }
}

fn dist(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[Complex]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Σ_j a_j b_j^m Π_{l≠j} f_l as an exact polynomial in t, for each m.
pub fn critical_numerators(family: &ArrangementFamily, z: &[Rational]) -> Vec<Poly> {
    let k = family.k();
    let forms: Vec<Poly> = (0..family.n())
        .map(|j| Poly::linear(&family.b()[j], z[j].clone()))
        .collect();
    (0..k)
        .map(|m| {
            let mut acc = Poly::zero(k);
            for j in 0..family.n() {
                let mut term = Poly::constant(k, family.weight(j) * &family.b()[j][m]);
                for (l, f) in forms.iter().enumerate() {
                    if l != j {
                        term = term.mul(f);
                    }
                }
                acc = acc.add(&term);
            }
            acc
        })
        .collect()
}

fn candidates_k1(family: &ArrangementFamily, z: &[Rational]) -> Vec<Vec<Complex>> {
    let numer = &critical_numerators(family, z)[0];
    let deg = numer.degree().unwrap_or(0) as usize;
    let mut coeffs = vec![Complex::zero(); deg + 1];
    for (e, c) in numer.terms() {
        coeffs[e[0] as usize] += to_complex(c);
    }
    poly_roots(&coeffs).into_iter().map(|r| vec![r]).collect()
}

/// Coefficients in s2 of a bivariate polynomial at s1 = x.
fn slice_at(p: &Poly, x: &Rational, deg: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); deg + 1];
    for (e, c) in p.terms() {
        out[e[1] as usize] += c * num_traits::pow(x.clone(), e[0] as usize);
    }
    out
}

fn slice_at_complex(p: &Poly, x: Complex, deg: usize) -> Vec<Complex> {
    let mut out = vec![Complex::zero(); deg + 1];
    for (e, c) in p.terms() {
        out[e[1] as usize] += to_complex(c) * x.powu(e[0]);
    }
    out
}

fn sylvester_det(p: &[Rational], q: &[Rational]) -> Rational {
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    let size = dp + dq;
    let m = Matrix::from_fn(size, size, |i, j| {
        if i < dq {
            // Row i holds p shifted by i, highest coefficient first.
            j.checked_sub(i)
                .and_then(|o| p.get(dp.checked_sub(o)?))
                .cloned()
                .unwrap_or_else(Rational::zero)
        } else {
            let r = i - dq;
            j.checked_sub(r)
                .and_then(|o| q.get(dq.checked_sub(o)?))
                .cloned()
                .unwrap_or_else(Rational::zero)
        }
    });
    m.det()
}

fn candidates_k2(family: &ArrangementFamily, z: &[Rational]) -> Result<Vec<Vec<Complex>>> {
    let n = family.n();
    let d = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _attempt in 0..50 {
        // A random change of coordinates t = M s puts the system in general
        // position: nonvanishing leading coefficients and distinct projections.
        let m = Matrix::from_fn(2, 2, |_, _| int(rng.random_range(-7..=7)));
        let det = m.det();
        if det.is_zero() {
            continue;
        }
        let b_s: Vec<Vec<Rational>> = family
            .b()
            .iter()
            .map(|row| {
                (0..2)
                    .map(|c| &row[0] * &m[(0, c)] + &row[1] * &m[(1, c)])
                    .collect()
            })
            .collect();
        if b_s.iter().any(|row| row.iter().any(Zero::is_zero)) {
            continue;
        }
        let sfam = match ArrangementFamily::new(b_s.clone(), family.weights().to_vec()) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let numer = critical_numerators(&sfam, z);
        let lead = |p: &Poly| slice_at(p, &Rational::zero(), d)[d].clone();
        if lead(&numer[0]).is_zero() || lead(&numer[1]).is_zero() {
            continue;
        }
        let total = d * d;
        let xs: Vec<Rational> = (0..=total as i64).map(int).collect();
        let ys: Vec<Rational> = xs
            .iter()
            .map(|x| sylvester_det(&slice_at(&numer[0], x, d), &slice_at(&numer[1], x, d)))
            .collect();
        let resultant = UniPoly::interpolate(&xs, &ys);

        // First coordinates of the vertices f_i = f_j = 0.
        let mut vertex_s1 = Vec::new();
        for pair in subsets(n, 2) {
            let (i, j) = (pair[0], pair[1]);
            let denom = &b_s[i][0] * &b_s[j][1] - &b_s[i][1] * &b_s[j][0];
            let num = -(&z[i] * &b_s[j][1]) + &z[j] * &b_s[i][1];
            vertex_s1.push(num / denom);
        }
        let mut deflated = resultant.clone();
        let mut exact = true;
        for v in &vertex_s1 {
            let (q, r) = deflated.div_linear(v);
            if !r.is_zero() {
                exact = false;
                break;
            }
            deflated = q;
        }
        if !exact {
            continue;
        }
        let coeffs: Vec<Complex> = deflated.coeffs().iter().map(to_complex).collect();
        let s1_roots = poly_roots(&coeffs);
        let mut out = Vec::new();
        for r in s1_roots {
            let s2_roots = poly_roots(&slice_at_complex(&numer[0], r, d));
            let h2 = slice_at_complex(&numer[1], r, d);
            let best = s2_roots.into_iter().min_by(|x, y| {
                let ex = |s: &Complex| {
                    h2.iter()
                        .rev()
                        .fold(Complex::zero(), |acc, c| acc * s + c)
                        .norm()
                };
                ex(x).total_cmp(&ex(y))
            });
            if let Some(s2) = best {
                let mc = m.map(to_complex);
                let t = mc.mul_vec(&[r, s2]);
                out.push(t);
            }
        }
        return Ok(out);
    }
    Err(Error::Numeric(
        "no admissible coordinate change for elimination".into(),
    ))
}

/// Σ_p g(p) h(p) / Hess(p) over the given critical points.
pub fn residue_pairing_analytic(
    points: &[CriticalPoint],
    g: impl Fn(&[Complex]) -> Complex,
    h: impl Fn(&[Complex]) -> Complex,
) -> Complex {
    points
        .iter()
        .map(|p| g(&p.t) * h(&p.t) / p.hessian_det)
        .sum()
}

/// Checks the Euler-type identity Σ t_i ∂Φ/∂t_i + Σ a_j z_j / f_j = |a| at t.
pub fn euler_defect(master: &MasterFunction, t: &[Complex]) -> f64 {
    let fam = master.family();
    let grad = master.gradient(t);
    let mut lhs: Complex = t.iter().zip(&grad).map(|(ti, gi)| ti * gi).sum();
    for j in 0..fam.n() {
        lhs += to_complex(fam.weight(j)) * master.z()[j] / master.f(j, t);
    }
    (lhs - to_complex(fam.weight_sum())).norm()
}

/// Exact polynomial form of the same identity for k = 1:
/// t·N(t) + Σ_j a_j z_j Π_{l≠j} f_l = |a| Π_l f_l, with N the numerator of Φ'.
pub fn euler_identity_k1_exact(family: &ArrangementFamily, z: &[Rational]) -> bool {
    let forms: Vec<Poly> = (0..family.n())
        .map(|j| Poly::linear(&family.b()[j], z[j].clone()))
        .collect();
    let numer = &critical_numerators(family, z)[0];
    let t = Poly::var(1, 0);
    let mut lhs = t.mul(numer);
    for (j, zj) in z.iter().enumerate() {
        let mut term = Poly::constant(1, family.weight(j) * zj);
        for (l, f) in forms.iter().enumerate() {
            if l != j {
                term = term.mul(f);
            }
        }
        lhs = lhs.add(&term);
    }
    let rhs = forms
        .iter()
        .fold(Poly::constant(1, family.weight_sum().clone()), |acc, f| {
            acc.mul(f)
        });
    lhs == rhs
}
