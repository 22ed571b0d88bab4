//! The canonical isomorphism from the critical algebra to singular vectors,
//! analytically through residues and combinatorially through ν scaled by c.

use num_traits::Zero;

use crate::critalg::{require_nondegenerate, solve_critical, CritElement, CriticalPoint, WAlgebra};
use crate::error::{Error, Result};
use crate::family::ArrangementFamily;
use crate::linalg::Matrix;
use crate::osflag::{singular_subspace, v_vector, FlagVector};
use crate::scalar::{rational_to_f64, to_complex, Complex, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoMode {
    Analytic,
    Combinatorial,
}

/// Matrix of α(z) from the anchored w-basis to the standard basis of V.
#[derive(Clone, Debug)]
pub struct CanonicalIso {
    pub matrix: Matrix<Complex>,
    pub mode: IsoMode,
    pub anchor: usize,
    pub points: Vec<CriticalPoint>,
}

impl CanonicalIso {
    pub fn apply(&self, x: &CritElement) -> FlagVector<Complex> {
        FlagVector::from_coeffs(
            self.matrix
                .mul_vec(&x.coeffs().iter().map(to_complex).collect::<Vec<_>>()),
        )
    }
}

/// α([g]) = Σ_p Σ_T g(p) f^T(p) / Hess(p) F_T with f^T = d_T / Π_{j∈T} f_j,
/// for an arbitrary function g on the fiber.
pub fn alpha_of_function(
    family: &ArrangementFamily,
    z: &[Complex],
    points: &[CriticalPoint],
    g: impl Fn(&[Complex]) -> Complex,
) -> FlagVector<Complex> {
    let index = family.index();
    let mut out = vec![Complex::zero(); index.len()];
    for p in points {
        let gp = g(&p.t) / p.hessian_det;
        for (pos, t) in index.subsets().iter().enumerate() {
            let mut ft = to_complex(&family.minor(t));
            for &j in t {
                ft /= family.f_value(j, z, &p.t);
            }
            out[pos] += gp * ft;
        }
    }
    FlagVector::from_coeffs(out)
}

pub fn canonical_iso_analytic(
    family: &ArrangementFamily,
    z: &[Rational],
    anchor: usize,
) -> Result<CanonicalIso> {
    let alg = WAlgebra::new(family, anchor)?;
    let points = solve_critical(family, z)?;
    require_nondegenerate(&points)?;
    let sing_dim = singular_subspace(family)?.dim();
    if points.len() != sing_dim {
        return Err(Error::Numeric(format!(
            "found {} critical points, expected {sing_dim}",
            points.len()
        )));
    }
    let zc: Vec<Complex> = z.iter().map(to_complex).collect();
    let cols: Vec<Vec<Complex>> = alg
        .basis()
        .iter()
        .map(|t| alpha_of_function(family, &zc, &points, |p| alg.w_value(t, &zc, p)).into_coeffs())
        .collect();
    Ok(CanonicalIso {
        matrix: Matrix::from_columns(family.index().len(), &cols),
        mode: IsoMode::Analytic,
        anchor,
        points,
    })
}

/// ν scaled by c, the combinatorial form of α.
pub fn canonical_iso_combinatorial(
    family: &ArrangementFamily,
    anchor: usize,
    c: Complex,
) -> Result<CanonicalIso> {
    let alg = WAlgebra::new(family, anchor)?;
    let cols: Vec<Vec<Complex>> = alg
        .basis()
        .iter()
        .map(|t| {
            v_vector(family, t)
                .to_scalar::<Complex>()
                .scale(&c)
                .into_coeffs()
        })
        .collect();
    Ok(CanonicalIso {
        matrix: Matrix::from_columns(family.index().len(), &cols),
        mode: IsoMode::Combinatorial,
        anchor,
        points: Vec::new(),
    })
}

/// The constant c with α = c ν, measured over base points.
#[derive(Clone, Debug)]
pub struct MeasuredConstant {
    /// Matrix of ν: columns v_T for the anchored basis.
    pub nu: Matrix<Rational>,
    pub c: Complex,
    /// Largest deviation of any component ratio from c.
    pub spread: f64,
    /// Largest |α(w_T) - c v_T| component.
    pub residual: f64,
}

pub fn naive_iso_and_constant(
    family: &ArrangementFamily,
    zs: &[Vec<Rational>],
    anchor: usize,
) -> Result<MeasuredConstant> {
    let alg = WAlgebra::new(family, anchor)?;
    let cols: Vec<Vec<Rational>> = alg
        .basis()
        .iter()
        .map(|t| v_vector(family, t).into_coeffs())
        .collect();
    let nu = Matrix::from_columns(family.index().len(), &cols);
    let mut ratios = Vec::new();
    let mut isos = Vec::new();
    for z in zs {
        let iso = canonical_iso_analytic(family, z, anchor)?;
        for i in 0..nu.rows() {
            for j in 0..nu.cols() {
                if !nu[(i, j)].is_zero() {
                    ratios.push(iso.matrix[(i, j)] / rational_to_f64(&nu[(i, j)]));
                }
            }
        }
        isos.push(iso);
    }
    if ratios.is_empty() {
        return Err(Error::Numeric("no samples for the constant".into()));
    }
    let c = ratios.iter().sum::<Complex>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - c).norm()).fold(0.0, f64::max);
    let nuc = nu.map(to_complex).scale(&c);
    let residual = isos
        .iter()
        .map(|iso| iso.matrix.sub(&nuc).max_magnitude())
        .fold(0.0, f64::max);
    Ok(MeasuredConstant {
        nu,
        c,
        spread,
        residual,
    })
}

/// Largest |(x, y)_z - (-1)^k S(αx, αy)| over pairs of basis elements, with
/// the residue form computed from critical points.
pub fn isometry_defect(family: &ArrangementFamily, z: &[Rational], anchor: usize) -> Result<f64> {
    let alg = WAlgebra::new(family, anchor)?;
    let iso = canonical_iso_analytic(family, z, anchor)?;
    let zc: Vec<Complex> = z.iter().map(to_complex).collect();
    let sign = if family.k() % 2 == 1 { -1.0 } else { 1.0 };
    let images: Vec<FlagVector<Complex>> = (0..alg.dim())
        .map(|i| iso.apply(&alg.basis_element(i)))
        .collect();
    let mut worst = 0.0f64;
    for (i, ti) in alg.basis().iter().enumerate() {
        for (j, tj) in alg.basis().iter().enumerate() {
            let residue = crate::critalg::residue_pairing_analytic(
                &iso.points,
                |p| alg.w_value(ti, &zc, p),
                |p| alg.w_value(tj, &zc, p),
            );
            let form = crate::osflag::contravariant_pairing(family, &images[i], &images[j]);
            worst = worst.max((residue - form * sign).norm());
        }
    }
    Ok(worst)
}
