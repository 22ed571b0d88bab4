//! Transport of flat sections of κ d - Σ K_j dz_j along complex paths with an
//! adaptive Dormand-Prince 5(4) integrator.

use serde_json::json;

use super::GmOperators;
use crate::error::{Error, Result};
use crate::family::ArrangementFamily;
use crate::osflag::FlagVector;
use crate::scalar::Complex;

/// A path in parameter space made of smooth pieces, each parametrized by
/// u ∈ [0, 1]. Velocities may jump between pieces.
pub trait ParamPath {
    fn pieces(&self) -> usize;
    fn point(&self, piece: usize, u: f64) -> Vec<Complex>;
    fn velocity(&self, piece: usize, u: f64) -> Vec<Complex>;
}

#[derive(Clone, Debug)]
pub struct Polyline {
    pub vertices: Vec<Vec<Complex>>,
}

impl ParamPath for Polyline {
    fn pieces(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    fn point(&self, piece: usize, u: f64) -> Vec<Complex> {
        let (a, b) = (&self.vertices[piece], &self.vertices[piece + 1]);
        a.iter().zip(b).map(|(x, y)| x + (y - x) * u).collect()
    }

    fn velocity(&self, piece: usize, _u: f64) -> Vec<Complex> {
        let (a, b) = (&self.vertices[piece], &self.vertices[piece + 1]);
        a.iter().zip(b).map(|(x, y)| y - x).collect()
    }
}

/// One coordinate travels once around a circle; the others stay fixed.
#[derive(Clone, Debug)]
pub struct CirclePath {
    pub base: Vec<Complex>,
    pub coordinate: usize,
    pub center: Complex,
    pub radius: f64,
}

impl ParamPath for CirclePath {
    fn pieces(&self) -> usize {
        1
    }

    fn point(&self, _piece: usize, u: f64) -> Vec<Complex> {
        let mut z = self.base.clone();
        z[self.coordinate] =
            self.center + Complex::from_polar(self.radius, std::f64::consts::TAU * u);
        z
    }

    fn velocity(&self, _piece: usize, u: f64) -> Vec<Complex> {
        let mut v = vec![Complex::new(0.0, 0.0); self.base.len()];
        v[self.coordinate] = Complex::new(0.0, std::f64::consts::TAU)
            * Complex::from_polar(self.radius, std::f64::consts::TAU * u);
        v
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Local error tolerance, used as both absolute and relative bound.
    pub tol: f64,
    /// Abort when min_C |f_C(z)| drops below this.
    pub guard: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-10,
            guard: 1e-6,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectorySample {
    /// Global path parameter in [0, 1].
    pub s: f64,
    pub z: Vec<Complex>,
    /// Standard-basis coordinates of the transported section.
    pub state: Vec<Complex>,
    /// Auxiliary integrals carried along with the section.
    pub extra: Vec<Complex>,
}

#[derive(Clone, Debug)]
pub struct GmTrajectory {
    pub kappa: Complex,
    pub samples: Vec<TrajectorySample>,
}

impl GmTrajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn first(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    /// One JSON object per line: {"s", "z", "I"} with complex entries as [re, im].
    pub fn to_jsonl(&self) -> String {
        let pair = |c: &Complex| json!([c.re, c.im]);
        let mut out = String::new();
        for smp in &self.samples {
            let line = json!({
                "s": smp.s,
                "z": smp.z.iter().map(pair).collect::<Vec<_>>(),
                "I": smp.state.iter().map(pair).collect::<Vec<_>>(),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates y' = f(u, y) from u0 to u1 and returns every accepted step.
pub fn dopri5(
    mut f: impl FnMut(f64, &[Complex]) -> Result<Vec<Complex>>,
    u0: f64,
    u1: f64,
    y0: &[Complex],
    opts: &FlowOptions,
) -> Result<Vec<(f64, Vec<Complex>)>> {
    let dim = y0.len();
    let mut u = u0;
    let mut y = y0.to_vec();
    let mut h = (u1 - u0) * 0.01;
    let mut out = vec![(u, y.clone())];
    let mut k1 = f(u, &y)?;
    let mut steps = 0;
    while u < u1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numeric(format!("step limit reached at u = {u}")));
        }
        if u + h > u1 {
            h = u1 - u;
        }
        let mut ks: Vec<Vec<Complex>> = vec![k1.clone()];
        for stage in 1..7 {
            let yi: Vec<Complex> = (0..dim)
                .map(|i| y[i] + (0..stage).map(|s| ks[s][i] * A[stage][s]).sum::<Complex>() * h)
                .collect();
            ks.push(f(u + C[stage] * h, &yi)?);
        }
        let y5: Vec<Complex> = (0..dim)
            .map(|i| y[i] + (0..7).map(|s| ks[s][i] * B5[s]).sum::<Complex>() * h)
            .collect();
        let mut err = 0.0f64;
        for i in 0..dim {
            let e: Complex = (0..7).map(|s| ks[s][i] * (B5[s] - B4[s])).sum::<Complex>() * h;
            let sc = opts.tol + opts.tol * y[i].norm().max(y5[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Numeric(format!("non-finite step at u = {u}")));
        }
        if err <= 1.0 {
            u += h;
            y = y5;
            // First-same-as-last: the seventh stage is f at the new point.
            k1 = ks.pop().expect("seven stages");
            out.push((u, y.clone()));
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * (u1 - u0).abs().max(1.0) && u < u1 {
            return Err(Error::Numeric(format!("step size underflow at u = {u}")));
        }
    }
    Ok(out)
}

/// Rates of auxiliary integrals given (z, ż, I).
pub type ExtraRates<'a> = dyn Fn(&[Complex], &[Complex], &[Complex]) -> Vec<Complex> + 'a;

/// Flat section along a path: κ dI/du = Σ_j (dz_j/du) K_j(z(u)) I.
///
/// `extra` returns derivatives of auxiliary integrals given (z, ż, I); they
/// are integrated alongside and start at zero.
pub fn flow_flat_section(
    family: &ArrangementFamily,
    kappa: Complex,
    path: &dyn ParamPath,
    initial: &FlagVector<Complex>,
    opts: &FlowOptions,
    extra: Option<&ExtraRates<'_>>,
) -> Result<GmTrajectory> {
    let ops = GmOperators::new(family);
    let dim = initial.dim();
    let pieces = path.pieces();
    let n_extra = extra.map_or(0, |e| {
        e(
            &path.point(0, 0.0),
            &path.velocity(0, 0.0),
            initial.coeffs(),
        )
        .len()
    });
    let mut state: Vec<Complex> = initial.coeffs().to_vec();
    state.extend(std::iter::repeat_n(Complex::new(0.0, 0.0), n_extra));
    let mut samples = vec![TrajectorySample {
        s: 0.0,
        z: path.point(0, 0.0),
        state: initial.coeffs().to_vec(),
        extra: vec![Complex::new(0.0, 0.0); n_extra],
    }];
    for piece in 0..pieces {
        let rhs = |u: f64, y: &[Complex]| -> Result<Vec<Complex>> {
            let z = path.point(piece, u);
            // TODO: for polylines f_C is affine on each piece, so the exact minimum
            // of |f_C| over a step could replace this stage-point sample.
            let margin = family.discriminant_margin(&z);
            if margin < opts.guard {
                return Err(Error::BadFiber(format!(
                    "path comes within {margin:e} of the discriminant at s = {}",
                    (piece as f64 + u) / pieces as f64
                )));
            }
            let w = path.velocity(piece, u);
            let a = ops.directional(&z, &w);
            let mut dy: Vec<Complex> = a
                .mul_vec(&y[..dim])
                .into_iter()
                .map(|x| x / kappa)
                .collect();
            if let Some(e) = extra {
                dy.extend(e(&z, &w, &y[..dim]));
            }
            Ok(dy)
        };
        let steps = dopri5(rhs, 0.0, 1.0, &state, opts)?;
        for (u, y) in steps.into_iter().skip(1) {
            samples.push(TrajectorySample {
                s: (piece as f64 + u) / pieces as f64,
                z: path.point(piece, u),
                state: y[..dim].to_vec(),
                extra: y[dim..].to_vec(),
            });
            state = y;
        }
    }
    Ok(GmTrajectory { kappa, samples })
}
