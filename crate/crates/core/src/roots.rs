//! Univariate root finding through companion-matrix eigenvalues, followed by
//! Newton polishing on the polynomial itself.

use nalgebra::DMatrix;

use crate::scalar::Complex;

fn horner(coeffs: &[Complex], x: Complex) -> (Complex, Complex) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of Σ coeffs[i] x^i with leading zeros trimmed.
pub fn poly_roots(coeffs: &[Complex]) -> Vec<Complex> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut coeffs = coeffs.to_vec();
    while coeffs
        .last()
        .is_some_and(|c| c.norm() <= 1e-300 || c.norm() <= scale * 1e-14)
    {
        coeffs.pop();
    }
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    if deg == 1 {
        return vec![-coeffs[0] / lead];
    }
    let companion = DMatrix::<Complex>::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let mut roots: Vec<Complex> = match companion.eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => Vec::new(),
    };
    if roots.len() != deg || roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        roots = aberth(&coeffs);
    }
    for r in roots.iter_mut() {
        for _ in 0..20 {
            let (p, dp) = horner(&coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
    }
    roots
}

/// Simultaneous iteration, used only if the eigenvalue route misbehaves.
fn aberth(coeffs: &[Complex]) -> Vec<Complex> {
    let deg = coeffs.len() - 1;
    let radius = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / coeffs[deg]).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..deg)
        .map(|i| {
            Complex::from_polar(
                radius,
                0.4 + 2.0 * std::f64::consts::PI * i as f64 / deg as f64,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(coeffs, z[i]);
            let ratio = p / dp;
            let mut s = Complex::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    s += Complex::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let w = ratio / (Complex::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}
