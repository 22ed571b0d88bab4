#![allow(dead_code)]

use arrfrob::family::random_positive_weights;
use arrfrob::scalar::{int, Rational};
use arrfrob::ArrangementFamily;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ints(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| int(x)).collect()
}

/// n points on a line with the given weights.
pub fn points(a: Vec<Rational>) -> ArrangementFamily {
    let n = a.len();
    ArrangementFamily::new(vec![vec![int(1)]; n], a).unwrap()
}

/// Rows (1, j+1, (j+1)^2, ..): always generic.
pub fn moment_rows(k: usize, n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|j| (0..k).map(|m| int((j as i64 + 1).pow(m as u32))).collect())
        .collect()
}

pub fn moment_family(k: usize, n: usize, a: Vec<Rational>) -> ArrangementFamily {
    ArrangementFamily::new(moment_rows(k, n), a).unwrap()
}

/// A generic family with small random integer linear parts and random
/// positive weights.
pub fn random_generic(k: usize, n: usize, seed: u64) -> ArrangementFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let b: Vec<Vec<Rational>> = (0..n)
            .map(|_| (0..k).map(|_| int(rng.random_range(-4..=4))).collect())
            .collect();
        let a = random_positive_weights(n, rng.random());
        if let Ok(f) = ArrangementFamily::new(b, a) {
            if f.is_generic() {
                return f;
            }
        }
    }
}

/// Index multisets of the given size over 0..n, in lexicographic order.
pub fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, len, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, len, 0, &mut Vec::new(), &mut out);
    out
}
