//! Flat and twisted periods along paths.
//!
//! The one-forms ψ_v and ψ_I pair with α([a_j/f_j]), which is evaluated as
//! K_j(z) q(z). Integrating them along a path and comparing with the change
//! of S(v, q) or S(I, q) therefore exercises both the conformal block
//! equation and the Gauss-Manin flow.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::ArrangementFamily;
use crate::gaussmanin::{
    conformal_block, dopri5, flow_flat_section, FlowOptions, GmOperators, GmTrajectory, ParamPath,
    Polyline,
};
use crate::osflag::{contravariant_pairing, FlagVector};
use crate::poly::Poly;
use crate::scalar::{rational_to_f64, Complex, Rational, Scalar};

#[derive(Clone, Debug, Serialize)]
pub struct PeriodCheck {
    pub name: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub rel_err: f64,
}

impl PeriodCheck {
    fn new(name: &str, lhs: Complex, rhs: Complex) -> Self {
        let scale = lhs.norm().max(rhs.norm()).max(1.0);
        PeriodCheck {
            name: name.into(),
            lhs: [lhs.re, lhs.im],
            rhs: [rhs.re, rhs.im],
            rel_err: (lhs - rhs).norm() / scale,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodReport {
    pub kappa: [f64; 2],
    pub checks: Vec<PeriodCheck>,
}

impl PeriodReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.rel_err <= tol)
    }
}

struct PeriodContext<'a> {
    family: &'a ArrangementFamily,
    ops: GmOperators,
    q: Vec<Poly>,
}

impl<'a> PeriodContext<'a> {
    fn new(family: &'a ArrangementFamily, anchor: usize) -> Result<Self> {
        Ok(PeriodContext {
            family,
            ops: GmOperators::new(family),
            q: conformal_block(family, anchor, &Rational::one())?,
        })
    }

    fn q_at(&self, z: &[Complex]) -> FlagVector<Complex> {
        FlagVector::from_coeffs(self.q.iter().map(|p| p.eval(z)).collect())
    }

    /// Σ_j ż_j S(u, K_j(z) q(z)).
    fn psi(&self, u: &[Complex], z: &[Complex], zdot: &[Complex]) -> Complex {
        let kq = self.ops.directional(z, zdot).mul_vec(self.q_at(z).coeffs());
        contravariant_pairing(
            self.family,
            &FlagVector::from_coeffs(u.to_vec()),
            &FlagVector::from_coeffs(kq),
        )
    }

    fn s_with_q(&self, u: &[Complex], z: &[Complex]) -> Complex {
        contravariant_pairing(
            self.family,
            &FlagVector::from_coeffs(u.to_vec()),
            &self.q_at(z),
        )
    }

    fn ratio(&self) -> Complex {
        let k = self.family.k() as f64;
        Complex::from(rational_to_f64(self.family.weight_sum()) / k)
    }
}

/// ∫ ψ_v along the path against (|a|/k) ΔS(v, q).
pub fn flat_period_check(
    family: &ArrangementFamily,
    v: &FlagVector<Complex>,
    path: &dyn ParamPath,
    anchor: usize,
    opts: &FlowOptions,
) -> Result<PeriodCheck> {
    let ctx = PeriodContext::new(family, anchor)?;
    let mut integral = Complex::zero();
    for piece in 0..path.pieces() {
        let steps = dopri5(
            |u, _| {
                let z = path.point(piece, u);
                if family.discriminant_margin(&z) < opts.guard {
                    return Err(Error::BadFiber(
                        "path comes too close to the discriminant".into(),
                    ));
                }
                Ok(vec![ctx.psi(v.coeffs(), &z, &path.velocity(piece, u))])
            },
            0.0,
            1.0,
            &[integral],
            opts,
        )?;
        integral = steps.last().expect("at least one sample").1[0];
    }
    let z0 = path.point(0, 0.0);
    let z1 = path.point(path.pieces() - 1, 1.0);
    let delta = ctx.s_with_q(v.coeffs(), &z1) - ctx.s_with_q(v.coeffs(), &z0);
    Ok(PeriodCheck::new(
        "flat period",
        integral,
        delta * ctx.ratio(),
    ))
}

fn reject_kappa(family: &ArrangementFamily, kappa: Complex) -> Result<()> {
    let special = rational_to_f64(family.weight_sum()) / family.k() as f64;
    if (kappa - special).norm() < 1e-12 * special.abs().max(1.0) {
        return Err(Error::Config(format!(
            "twisted periods require κ ≠ |a|/k = {special}"
        )));
    }
    Ok(())
}

/// Flows I and compares ΔS(I, q) with (1/κ + k/|a|) ∫ ψ_I.
pub fn twisted_period_check(
    family: &ArrangementFamily,
    kappa: Complex,
    path: &dyn ParamPath,
    initial: &FlagVector<Complex>,
    anchor: usize,
    opts: &FlowOptions,
) -> Result<(GmTrajectory, PeriodCheck)> {
    reject_kappa(family, kappa)?;
    let ctx = PeriodContext::new(family, anchor)?;
    let psi = |z: &[Complex], zdot: &[Complex], i: &[Complex]| vec![ctx.psi(i, z, zdot)];
    let traj = flow_flat_section(family, kappa, path, initial, opts, Some(&psi))?;
    let (first, last) = (traj.first(), traj.last());
    let delta = ctx.s_with_q(&last.state, &last.z) - ctx.s_with_q(&first.state, &first.z);
    let factor = Complex::from(1.0) / kappa + Complex::from(1.0) / ctx.ratio();
    let check = PeriodCheck::new("twisted period", delta, last.extra[0] * factor);
    Ok((traj, check))
}

/// The pairing S(I(z, κ), I(z, -κ)) at both ends of the path.
pub fn dual_pairing_drift(
    family: &ArrangementFamily,
    kappa: Complex,
    path: &dyn ParamPath,
    plus: &FlagVector<Complex>,
    minus: &FlagVector<Complex>,
    opts: &FlowOptions,
) -> Result<PeriodCheck> {
    let a = flow_flat_section(family, kappa, path, plus, opts, None)?;
    let b = flow_flat_section(family, -kappa, path, minus, opts, None)?;
    let pair = |x: &[Complex], y: &[Complex]| {
        contravariant_pairing(
            family,
            &FlagVector::from_coeffs(x.to_vec()),
            &FlagVector::from_coeffs(y.to_vec()),
        )
    };
    Ok(PeriodCheck::new(
        "pairing of ±κ sections",
        pair(&a.last().state, &b.last().state),
        pair(&a.first().state, &b.first().state),
    ))
}

/// For points on a line: the one-form Σ_l a_l I_l dz_l built from a flat
/// section is closed. Returns max |a_l ∂_i I_l - a_i ∂_l I_i| relative to the
/// largest derivative, with derivatives at the end of `path` taken by central
/// differences of step h.
pub fn twisted_closedness_k1(
    family: &ArrangementFamily,
    kappa: Complex,
    path: &dyn ParamPath,
    initial: &FlagVector<Complex>,
    h: f64,
    opts: &FlowOptions,
) -> Result<f64> {
    if family.k() != 1 {
        return Err(Error::Unsupported(
            "closedness of twisted periods is stated for k = 1".into(),
        ));
    }
    let traj = flow_flat_section(family, kappa, path, initial, opts, None)?;
    let end = traj.last();
    let n = family.n();
    let index = family.index();
    let component =
        |state: &[Complex], l: usize| state[index.position(&[l]).expect("singleton flag")];
    let mut grads = Vec::with_capacity(n);
    for i in 0..n {
        let shifted = |sign: f64| -> Result<Vec<Complex>> {
            let mut target = end.z.clone();
            target[i] += Complex::from(sign * h);
            let seg = Polyline {
                vertices: vec![end.z.clone(), target],
            };
            let start = FlagVector::from_coeffs(end.state.clone());
            Ok(flow_flat_section(family, kappa, &seg, &start, opts, None)?
                .last()
                .state
                .clone())
        };
        let (up, down) = (shifted(1.0)?, shifted(-1.0)?);
        grads.push(
            (0..n)
                .map(|l| (component(&up, l) - component(&down, l)) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let a: Vec<Complex> = (0..n)
        .map(|j| Complex::from_rational(family.weight(j)))
        .collect();
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for l in 0..n {
            scale = scale.max((a[l] * grads[i][l]).norm());
            defect = defect.max((a[l] * grads[i][l] - a[i] * grads[l][i]).norm());
        }
    }
    Ok(defect / scale.max(f64::MIN_POSITIVE))
}

/// Flat period, twisted period and, for points on a line, closedness of the
/// twisted one-form, for one initial section along one path.
pub fn flat_and_twisted_periods(
    family: &ArrangementFamily,
    kappa: Complex,
    path: &dyn ParamPath,
    initial: &FlagVector<Complex>,
    anchor: usize,
    opts: &FlowOptions,
) -> Result<PeriodReport> {
    let mut checks = vec![flat_period_check(family, initial, path, anchor, opts)?];
    let (_, twisted) = twisted_period_check(family, kappa, path, initial, anchor, opts)?;
    checks.push(twisted);
    if family.k() == 1 {
        let defect = twisted_closedness_k1(family, kappa, path, initial, 1e-3, opts)?;
        checks.push(PeriodCheck {
            name: "closed twisted one-form".into(),
            lhs: [defect, 0.0],
            rhs: [0.0, 0.0],
            rel_err: defect,
        });
    }
    Ok(PeriodReport {
        kappa: [kappa.re, kappa.im],
        checks,
    })
}
