//! Identity suites run by `arrfrob check`. Each suite returns one record per
//! identity, aggregated over the sampled base points.

use std::fmt::Display;
use std::str::FromStr;

use num_complex::Complex64 as Complex;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arrfrob::critalg::{solve_critical, WAlgebra};
use arrfrob::family::{subsets, ArrangementFamily};
use arrfrob::frobenius::{
    a_constant, check_dual_product_points, check_period_identity, check_sing_product_points,
    contravariant_compositions, dual_pairing_drift, eta_and_beta, flat_period_check,
    isometry_defect, kernel_relation_defect, multi_identity, naive_iso_and_constant,
    plucker_identities, potential_first_closed_form, potential_first_poly, potential_identity_rhs,
    potential_second_derivative, strata_restriction_k1, stratum_family, twisted_closedness_k1,
    twisted_period_check,
};
use arrfrob::gaussmanin::{
    check_conformal_block, check_derivative_section_flatness, check_flatness,
    check_symmetry_and_invariance, derivative_sections, FlowOptions, Polyline,
};
use arrfrob::linalg::Matrix;
use arrfrob::osflag::{
    contravariant_pairing, gram_det_points, gram_v, singular_subspace, v_vector,
};
use arrfrob::scalar::{
    binomial, format_complex, format_rational, int, rational_to_f64, to_complex, Rational,
};
use arrfrob::{Error, Result};

use crate::report::{CheckRecord, SuiteRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Circuits,
    Basis,
    Flatness,
    Symmetry,
    Critical,
    Canonical,
    Conformal,
    Potential,
    Periods,
    Strata,
}

pub const ALL_SUITES: [Suite; 10] = [
    Suite::Circuits,
    Suite::Basis,
    Suite::Flatness,
    Suite::Symmetry,
    Suite::Critical,
    Suite::Canonical,
    Suite::Conformal,
    Suite::Potential,
    Suite::Periods,
    Suite::Strata,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Circuits => "circuits",
            Suite::Basis => "basis",
            Suite::Flatness => "flatness",
            Suite::Symmetry => "symmetry",
            Suite::Critical => "critical",
            Suite::Canonical => "canonical",
            Suite::Conformal => "conformal",
            Suite::Potential => "potential",
            Suite::Periods => "periods",
            Suite::Strata => "strata",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ALL_SUITES
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ALL_SUITES.iter().map(|x| x.name()).collect();
                format!("unknown suite `{s}` (expected one of {})", names.join(", "))
            })
    }
}

impl Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub struct SuiteContext<'a> {
    pub family: &'a ArrangementFamily,
    pub points: Vec<Vec<Rational>>,
    pub seed: u64,
    pub tol: f64,
    pub anchor: usize,
}

impl<'a> SuiteContext<'a> {
    pub fn new(
        family: &'a ArrangementFamily,
        seed: u64,
        tol: f64,
        samples: usize,
        anchor: usize,
    ) -> Result<Self> {
        let points = (0..samples as u64)
            .map(|i| family.sample_good_point(seed.wrapping_add(i)))
            .collect::<Result<_>>()?;
        Ok(SuiteContext {
            family,
            points,
            seed,
            tol,
            anchor,
        })
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

pub fn run_suite(suite: Suite, ctx: &SuiteContext) -> SuiteRecord {
    let checks = match suite {
        Suite::Circuits => circuits(ctx),
        Suite::Basis => basis(ctx),
        Suite::Flatness => flatness(ctx),
        Suite::Symmetry => symmetry(ctx),
        Suite::Critical => critical(ctx),
        Suite::Canonical => canonical(ctx),
        Suite::Conformal => conformal(ctx),
        Suite::Potential => potential(ctx),
        Suite::Periods => periods(ctx),
        Suite::Strata => strata(ctx),
    };
    SuiteRecord {
        suite: suite.name().into(),
        checks,
    }
}

fn zfmt(z: &[Rational]) -> String {
    format!(
        "z=[{}]",
        z.iter().map(format_rational).collect::<Vec<_>>().join(", ")
    )
}

/// Collects witnesses of an exact identity over the sample points; errors
/// raised while checking count as witnesses.
fn exact_over_points(
    ctx: &SuiteContext,
    identity: &str,
    formula: &str,
    mut f: impl FnMut(&[Rational]) -> Result<Vec<String>>,
) -> CheckRecord {
    let mut witnesses = Vec::new();
    for z in &ctx.points {
        match f(z) {
            Ok(w) => witnesses.extend(w.into_iter().map(|w| format!("{}: {w}", zfmt(z)))),
            Err(e @ Error::Unsupported(_)) => {
                return CheckRecord::skipped(identity, formula, e.to_string())
            }
            Err(e) => witnesses.push(format!("{}: {e}", zfmt(z))),
        }
    }
    CheckRecord::exact(identity, formula, witnesses)
}

fn numeric_over_points(
    ctx: &SuiteContext,
    identity: &str,
    formula: &str,
    tol: f64,
    mut f: impl FnMut(&[Rational]) -> Result<f64>,
) -> CheckRecord {
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    for z in &ctx.points {
        match f(z) {
            Ok(e) => {
                if e > tol {
                    witnesses.push(format!("{}: error {e:.3e}", zfmt(z)));
                }
                worst = worst.max(e);
            }
            Err(e @ Error::Unsupported(_)) => {
                return CheckRecord::skipped(identity, formula, e.to_string())
            }
            Err(e) => witnesses.push(format!("{}: {e}", zfmt(z))),
        }
    }
    CheckRecord::numeric(identity, formula, worst, tol, witnesses)
}

fn circuits(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let mut relation = Vec::new();
    let mut minimal = Vec::new();
    for c in fam.circuits() {
        for row in 0..fam.k() {
            let s: Rational = c
                .indices
                .iter()
                .zip(&c.lambda)
                .map(|(&j, l)| l * &fam.b()[j][row])
                .sum();
            if s != int(0) {
                relation.push(format!(
                    "{:?}: row {row} sums to {}",
                    c.indices,
                    format_rational(&s)
                ));
            }
        }
        if c.lambda[0] != int(1) || c.lambda.iter().any(|l| *l == int(0)) {
            relation.push(format!("{:?}: bad normalization", c.indices));
        }
        for skip in 0..c.len() {
            let rest: Vec<usize> = c
                .indices
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != skip)
                .map(|(_, &j)| j)
                .collect();
            if fam.rank_of(&rest) != rest.len() {
                minimal.push(format!(
                    "{:?} without {} is dependent",
                    c.indices, c.indices[skip]
                ));
            }
        }
    }
    let mut out = vec![
        CheckRecord::exact("circuit relations", "Σ_{i∈C} λ_i g_i = 0", relation),
        CheckRecord::exact(
            "circuit minimality",
            "minimal dependent subsets of {g_j}",
            minimal,
        ),
    ];
    if fam.is_generic() {
        let mut w = Vec::new();
        let expected = binomial(fam.n(), fam.k() + 1);
        if fam.circuits().len() != expected {
            w.push(format!(
                "{} circuits, expected {expected}",
                fam.circuits().len()
            ));
        }
        for c in fam.circuits() {
            let form = fam.generic_form(&c.indices);
            let lead = form[c.indices[0]].clone();
            if c.indices
                .iter()
                .zip(&c.lambda)
                .any(|(&j, l)| form[j].clone() / &lead != *l)
            {
                w.push(format!(
                    "{:?}: relation is not proportional to the minor form",
                    c.indices
                ));
            }
        }
        out.push(CheckRecord::exact(
            "generic circuits and discriminant forms",
            "f_{i_1..i_{k+1}} = Σ_m (-1)^{m} z_{i_m} d_{i_1..î_m..i_{k+1}}",
            w,
        ));
    }
    out
}

fn basis(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let anchor_dim = "dim Sing V = |χ(U)|";
    let sing = match singular_subspace(fam) {
        Ok(s) => s,
        Err(e) => {
            return vec![CheckRecord::failed_to_run(
                "nondegenerate contravariant form on Sing V",
                anchor_dim,
                e.to_string(),
            )]
        }
    };
    let mut out = Vec::new();
    let alg = match WAlgebra::new(fam, ctx.anchor) {
        Ok(a) => a,
        Err(e) => {
            return vec![CheckRecord::skipped(
                "w-basis",
                "w_T = Π a_T d_T / Π_{j∈T} f_j",
                e.to_string(),
            )]
        }
    };
    let mut w = Vec::new();
    if sing.dim() != alg.dim() || alg.dim() != binomial(fam.n() - 1, fam.k()) {
        w.push(format!(
            "dim Sing V = {}, w-basis size {}, expected C(n-1,k)",
            sing.dim(),
            alg.dim()
        ));
    }
    out.push(CheckRecord::exact(
        "dimension of singular vectors",
        anchor_dim,
        w,
    ));
    let w: Vec<String> = alg
        .basis()
        .iter()
        .filter(|t| !sing.contains(fam, &v_vector(fam, t)))
        .map(|t| format!("v{t:?} is not singular"))
        .collect();
    out.push(CheckRecord::exact(
        "v-vectors are singular",
        "δ^{(a)} v_T = 0",
        w,
    ));
    let ranked = Matrix::from_columns(
        fam.index().len(),
        &alg.basis()
            .iter()
            .map(|t| v_vector(fam, t).into_coeffs())
            .collect::<Vec<_>>(),
    )
    .rank();
    let w = if ranked == sing.dim() {
        vec![]
    } else {
        vec![format!("v-vectors span dimension {ranked}")]
    };
    out.push(CheckRecord::exact(
        "v-vectors form a basis of Sing V",
        "basis of Sing V",
        w,
    ));
    let mut w = Vec::new();
    for t1 in alg.basis() {
        for t2 in alg.basis() {
            let direct = contravariant_pairing(fam, &v_vector(fam, t1), &v_vector(fam, t2));
            if direct != gram_v(fam, t1, t2) {
                w.push(format!("S(v{t1:?}, v{t2:?})"));
            }
        }
    }
    out.push(CheckRecord::exact(
        "Gram values of v-vectors",
        "S(v_T, v_T') closed form",
        w,
    ));
    if fam.k() == 1 {
        let expected: Rational = fam.weights().iter().product::<Rational>() / fam.weight_sum();
        let w = match gram_det_points(fam) {
            Ok(d) if d == expected => vec![],
            Ok(d) => vec![format!(
                "det = {}, expected {}",
                format_rational(&d),
                format_rational(&expected)
            )],
            Err(e) => vec![e.to_string()],
        };
        out.push(CheckRecord::exact(
            "Gram determinant",
            "det S(v_i, v_j) = Π a_j / |a|",
            w,
        ));
    }
    out
}

fn flatness(ctx: &SuiteContext) -> Vec<CheckRecord> {
    vec![exact_over_points(
        ctx,
        "flatness of the Gauss-Manin connection",
        "∂_i K_j - ∂_j K_i = 0, [K_i, K_j]|_{Sing V} = 0",
        |z| Ok(check_flatness(ctx.family, z)?.failures),
    )]
}

fn symmetry(ctx: &SuiteContext) -> Vec<CheckRecord> {
    vec![exact_over_points(
        ctx,
        "symmetry and invariance of K_j",
        "S(K_j x, y) = S(x, K_j y), K_j(Sing V) ⊂ Sing V",
        |z| Ok(check_symmetry_and_invariance(ctx.family, z)?.failures),
    )]
}

fn critical(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let expected = binomial(fam.n() - 1, fam.k());
    let mut counts = Vec::new();
    let mut worst = 0.0f64;
    let mut min_hess = f64::INFINITY;
    for z in &ctx.points {
        match solve_critical(fam, z) {
            Ok(points) => {
                if points.len() != expected {
                    counts.push(format!(
                        "{}: {} critical points, expected {expected}",
                        zfmt(z),
                        points.len()
                    ));
                }
                for p in &points {
                    worst = worst.max(p.residual);
                    min_hess = min_hess.min(p.hessian_det.norm());
                }
            }
            Err(e @ Error::Unsupported(_)) => {
                return vec![CheckRecord::skipped(
                    "number of critical points",
                    "#crit Φ = |χ(U)|",
                    e.to_string(),
                )]
            }
            Err(e) => counts.push(format!("{}: {e}", zfmt(z))),
        }
    }
    let hess = if min_hess > arrfrob::critalg::DEGENERATE_HESSIAN {
        vec![]
    } else {
        vec![format!("smallest |Hess| = {min_hess:.3e}")]
    };
    vec![
        CheckRecord::exact("number of critical points", "#crit Φ = |χ(U)|", counts),
        CheckRecord::exact("nondegenerate critical points", "Hess(p) ≠ 0", hess),
        CheckRecord::numeric(
            "critical point residual",
            "∂Φ/∂t_i = 0",
            worst,
            1e-10,
            vec![],
        ),
    ]
}

fn canonical(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let mut out = Vec::new();
    let (iso_name, iso_anchor) = (
        "canonical map is a constant multiple of ν",
        "α(z)(w_T) = c v_T",
    );
    match naive_iso_and_constant(fam, &ctx.points, ctx.anchor) {
        Ok(m) => {
            out.push(CheckRecord::numeric(
                iso_name,
                iso_anchor,
                m.residual,
                ctx.tol,
                vec![],
            ));
            let mut rec = CheckRecord::numeric(
                "measured constant c",
                "c constant in z",
                m.spread,
                1e-7,
                vec![],
            );
            rec.witnesses.push(format!("c = {}", format_complex(&m.c)));
            out.push(rec);
        }
        Err(e @ Error::Unsupported(_)) => {
            out.push(CheckRecord::skipped(iso_name, iso_anchor, e.to_string()))
        }
        Err(e) => out.push(CheckRecord::failed_to_run(
            iso_name,
            iso_anchor,
            e.to_string(),
        )),
    }
    out.push(numeric_over_points(
        ctx,
        "isometry of the canonical map",
        "(f, g)_z = (-1)^k S(α f, α g)",
        ctx.tol,
        |z| isometry_defect(fam, z, ctx.anchor),
    ));
    let Ok(alg) = WAlgebra::new(fam, ctx.anchor) else {
        return out;
    };
    match contravariant_compositions(&alg) {
        Ok(signs) => {
            let expected: Option<i8> = match fam.k() {
                1 => Some(-1),
                2 => Some(1),
                _ => None,
            };
            let mut rec = CheckRecord::exact(
                "contravariant map compositions",
                "α∘[S] = ±π, [S]∘α = ±id",
                match (signs.alpha_after_s, signs.s_after_alpha) {
                    (Some(a), Some(b)) if a == b && (expected.is_none() || expected == Some(a)) => {
                        vec![]
                    }
                    other => vec![format!("signs {other:?}")],
                },
            );
            if rec.witnesses.is_empty() {
                rec.witnesses
                    .push(format!("sign {}", signs.alpha_after_s.unwrap_or(0)));
            }
            out.push(rec);
        }
        Err(e) => out.push(CheckRecord::failed_to_run(
            "contravariant map compositions",
            "α∘[S] = ±π",
            e.to_string(),
        )),
    }
    out.push(exact_over_points(
        ctx,
        "period map is the identity of Sing V",
        "q(z) *_z x = x",
        |z| {
            Ok(if check_period_identity(&alg, z, &int(1))? {
                vec![]
            } else {
                vec!["q * x ≠ x".into()]
            })
        },
    ));
    if fam.k() == 1 && fam.b().iter().all(|r| r == &fam.b()[0]) {
        out.push(exact_over_points(
            ctx,
            "product on singular vectors",
            "v_j * v_i = a_j/(z_j - z_i) v_i + a_i/(z_i - z_j) v_j",
            |z| {
                Ok(check_sing_product_points(&alg, z)?
                    .into_iter()
                    .map(|p| format!("pair {p:?}"))
                    .collect())
            },
        ));
        out.push(exact_over_points(
            ctx,
            "product on the dual of singular vectors",
            "h_j * h_i = h_i/(z_i - z_j) + h_j/(z_j - z_i)",
            |z| {
                Ok(check_dual_product_points(&alg, z)?
                    .into_iter()
                    .map(|p| format!("pair {p:?}"))
                    .collect())
            },
        ));
    }
    out
}

fn conformal(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let mut out = vec![exact_over_points(
        ctx,
        "conformal block equation and homogeneity",
        "(|a|/k) ∂_j {1} = K_j {1}",
        |z| Ok(check_conformal_block(fam, z, ctx.anchor)?.failures),
    )];
    let Ok(alg) = WAlgebra::new(fam, ctx.anchor) else {
        return out;
    };
    out.push(exact_over_points(
        ctx,
        "identity element closed form",
        "[1] = (|a|^{-1} Σ z_j [a_j/f_j])^k",
        |z| {
            Ok(if alg.identity_closed_form(z) == alg.identity_by_power(z) {
                vec![]
            } else {
                vec!["closed form ≠ power".into()]
            })
        },
    ));
    let other = (0..fam.n()).find(|&j| j != ctx.anchor).unwrap_or(0);
    if let Ok(alg2) = WAlgebra::new(fam, other) {
        out.push(exact_over_points(
            ctx,
            "identity element does not depend on the anchor",
            "{1}(z) = α([1])",
            |z| {
                let same =
                    alg.nu(&alg.identity_closed_form(z)) == alg2.nu(&alg2.identity_closed_form(z));
                Ok(if same {
                    vec![]
                } else {
                    vec![format!("anchors {} and {other} disagree", ctx.anchor)]
                })
            },
        ));
    }
    let mut rng = ctx.rng(6);
    let tuples: Vec<Vec<usize>> = (1..=fam.k() + 1)
        .map(|r| (0..r).map(|_| rng.random_range(0..fam.n())).collect())
        .collect();
    out.push(exact_over_points(
        ctx,
        "derivatives of the identity section",
        "∂^r{1} = k!/(k-r)! |a|^{-r} α(Π [a_m/f_m])",
        |z| {
            let mut w = Vec::new();
            for ms in &tuples {
                if let Err(e) = derivative_sections(fam, z, ms, ctx.anchor) {
                    w.push(format!("{ms:?}: {e}"));
                }
                if ms.len() < fam.k() {
                    w.extend(check_derivative_section_flatness(fam, z, ms, ctx.anchor)?.failures);
                }
            }
            Ok(w)
        },
    ));
    out
}

/// Index multisets of size `len` drawn from `set`, at most `limit` of them.
fn multisets(set: &[usize], len: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for combo in subsets(set.len() + len - 1, len) {
        if out.len() == limit {
            break;
        }
        // Stars and bars: combo[i] - i indexes into set.
        out.push(combo.iter().enumerate().map(|(i, &c)| set[c - i]).collect());
    }
    out
}

fn potential(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let k = fam.k();
    let mut out = Vec::new();
    let mut w = Vec::new();
    if a_constant(2, 3).ok() != Some(24.into()) {
        w.push("A_{2,3} ≠ 24".into());
    }
    for kk in 1..=5usize {
        if a_constant(kk, 2 * kk).ok() != Some(arrfrob::scalar::factorial(2 * kk as u32)) {
            w.push(format!("A_{{{kk},{}}} ≠ (2k)!", 2 * kk));
        }
    }
    out.push(CheckRecord::exact(
        "combinatorial constants",
        "A_{2,3} = 24, A_{k,2k} = (2k)!",
        w,
    ));
    if !fam.is_generic() {
        out.push(CheckRecord::skipped(
            "potential identities",
            "∂^{2k+1} P̃",
            "family is not generic".into(),
        ));
        return out;
    }
    let Ok(alg) = WAlgebra::new(fam, ctx.anchor) else {
        return out;
    };
    let Ok(p_poly) = potential_first_poly(fam, ctx.anchor) else {
        return out;
    };
    let mut rng = ctx.rng(8);
    let all: Vec<usize> = (0..fam.n()).collect();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    if let Some(c) = fam.circuits().choose(&mut rng) {
        tuples.extend(multisets(&c.indices, 2 * k + 1, 40));
    }
    tuples.extend((0..10).map(|_| {
        (0..2 * k + 1)
            .map(|_| *all.choose(&mut rng).expect("n ≥ 1"))
            .collect()
    }));
    out.push(exact_over_points(
        ctx,
        "second potential",
        "∂^{2k+1}P̃/∂z_{m_0}..∂z_{m_{2k}} = (-1)^k (Π β(∂_{m_i}), [1])",
        |z| {
            let mut w = Vec::new();
            for ms in &tuples {
                let lhs = potential_second_derivative(fam, z, ms, &int(1))?;
                if lhs != potential_identity_rhs(&alg, z, ms) {
                    w.push(format!("{ms:?}"));
                }
            }
            Ok(w)
        },
    ));
    let multi: Vec<Vec<usize>> = (0..=(2 * k).min(4))
        .flat_map(|r| multisets(&all, r, 6))
        .collect();
    out.push(exact_over_points(
        ctx,
        "derivatives of the first potential",
        "(Π β(∂_{m_i}), [1]) = (-1)^k |a|^r / A_{k,r} ∂^r P",
        |z| {
            let mut w = Vec::new();
            for ms in &multi {
                let (l, r) = multi_identity(&alg, &p_poly, z, ms)?;
                if l != r {
                    w.push(format!("{ms:?}"));
                }
            }
            Ok(w)
        },
    ));
    out.push(exact_over_points(
        ctx,
        "residue form on tangent vectors",
        "η(∂_i, ∂_j) = |a|^2/k^2 (-1)^k S(∂_i q, ∂_j q)",
        |z| {
            let mut w = Vec::new();
            for i in 0..fam.n() {
                for j in i..fam.n() {
                    let e = eta_and_beta(fam, z, i, j, ctx.anchor)?;
                    if e.residue != e.from_period_map
                        || e.closed_form.as_ref().is_some_and(|c| *c != e.residue)
                    {
                        w.push(format!("({i}, {j})"));
                    }
                }
            }
            Ok(w)
        },
    ));
    if k <= 2 && (k == 2 || fam.b().iter().all(|r| r == &fam.b()[0])) {
        let w = match potential_first_closed_form(fam) {
            Ok(cf) if cf.sub(&p_poly).is_zero() => vec![],
            Ok(_) => vec!["S(q, q) differs from the closed form".into()],
            Err(e) => vec![e.to_string()],
        };
        out.push(CheckRecord::exact(
            "first potential closed form",
            "P(z) = S(q(z), q(z))",
            w,
        ));
    }
    if k == 2 {
        out.push(exact_over_points(
            ctx,
            "Plücker identities",
            "f_{ijk}/(d_{ki} d_{ij}) + f_{ikl}/(d_{li} d_{ik}) + f_{ilj}/(d_{ji} d_{il}) = 0",
            |z| {
                Ok(if plucker_identities(fam, z)? {
                    vec![]
                } else {
                    vec!["identity fails".into()]
                })
            },
        ));
    }
    let rest_sets = subsets(fam.n(), k - 1);
    out.push(exact_over_points(
        ctx,
        "kernel of the second potential",
        "Σ_j d_{j,T'} ∂_j ∂^{2k} P̃ = 0",
        |z| {
            let mut w = Vec::new();
            for rest in rest_sets.iter().take(3) {
                for ms in multisets(&all, 2 * k, 4) {
                    let d = kernel_relation_defect(fam, z, rest, &ms)?;
                    if d != int(0) {
                        w.push(format!("T'={rest:?} m={ms:?}"));
                    }
                }
            }
            Ok(w)
        },
    ));
    out
}

/// A path z0 → z0 + iδ → z1 + iδ → z1. The real parts of the discriminant
/// forms are nonzero at both ends, and the offset δ is drawn so that their
/// imaginary parts stay away from zero on the middle segment.
fn detour(
    fam: &ArrangementFamily,
    z0: &[Rational],
    z1: &[Rational],
    rng: &mut ChaCha8Rng,
) -> Polyline {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for _ in 0..32 {
        let off: Vec<f64> = (0..fam.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let margin = fam
            .circuits()
            .iter()
            .map(|c| {
                c.indices
                    .iter()
                    .zip(&c.lambda)
                    .map(|(&j, l)| rational_to_f64(l) * off[j])
                    .sum::<f64>()
                    .abs()
            })
            .fold(f64::INFINITY, f64::min);
        if margin > best.0 {
            best = (margin, off);
        }
    }
    let off = best.1;
    let a: Vec<Complex> = z0.iter().map(to_complex).collect();
    let b: Vec<Complex> = z1.iter().map(to_complex).collect();
    let bump = |v: &[Complex]| -> Vec<Complex> {
        v.iter()
            .zip(&off)
            .map(|(x, d)| x + Complex::new(0.0, *d))
            .collect()
    };
    Polyline {
        vertices: vec![a.clone(), bump(&a), bump(&b), b],
    }
}

fn periods(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let opts = FlowOptions::default();
    let mut kappa = Complex::from(17.0);
    if (kappa - rational_to_f64(fam.weight_sum()) / fam.k() as f64).norm() < 1e-9 {
        kappa = Complex::from(19.0);
    }
    let Ok(sing) = singular_subspace(fam) else {
        return vec![];
    };
    let Some(first) = sing.basis().first() else {
        return vec![];
    };
    let initial = first.to_scalar::<Complex>();
    let n_pts = ctx.points.len();
    let mut rng = ctx.rng(10);
    let paths: Vec<Polyline> = (0..n_pts)
        .map(|i| detour(fam, &ctx.points[i], &ctx.points[(i + 1) % n_pts], &mut rng))
        .collect();
    let tol_flat = ctx.tol.max(1e-6);
    let tol_tw = ctx.tol.max(1e-5);
    let over_paths =
        |identity: &str, formula: &str, tol: f64, f: &dyn Fn(&Polyline) -> Result<f64>| {
            let mut worst = 0.0f64;
            let mut w = Vec::new();
            for (i, p) in paths.iter().enumerate() {
                match f(p) {
                    Ok(e) => worst = worst.max(e),
                    Err(e) => w.push(format!("path {i}: {e}")),
                }
            }
            CheckRecord::numeric(identity, formula, worst, tol, w)
        };
    let mut out = vec![
        over_paths(
            "flat periods",
            "ψ_v = (|a|/k) d S(v, q(z))",
            tol_flat,
            &|p| Ok(flat_period_check(fam, &initial, p, ctx.anchor, &opts)?.rel_err),
        ),
        over_paths(
            "twisted periods",
            "ψ_I = (1/κ + k/|a|)^{-1} d S(I(z), q(z))",
            tol_tw,
            &|p| {
                Ok(
                    twisted_period_check(fam, kappa, p, &initial, ctx.anchor, &opts)?
                        .1
                        .rel_err,
                )
            },
        ),
    ];
    if let Some(second) = sing.basis().get(1) {
        let minus = second.to_scalar::<Complex>();
        out.push(over_paths(
            "pairing of sections at ±κ",
            "(I(z, κ), I(z, -κ))_z constant",
            tol_flat,
            &|p| Ok(dual_pairing_drift(fam, kappa, p, &initial, &minus, &opts)?.rel_err),
        ));
    }
    if fam.k() == 1 {
        out.push(over_paths(
            "closed twisted one-form",
            "I_{γ,κ} = -κ d p_{γ,κ}",
            tol_tw,
            &|p| twisted_closedness_k1(fam, kappa, p, &initial, 1e-3, &opts),
        ));
    }
    out
}

fn strata(ctx: &SuiteContext) -> Vec<CheckRecord> {
    let fam = ctx.family;
    let anchor = "z_i - z_j = 0 for i, j ∈ J_ℓ";
    if fam.k() != 1 || fam.n() < 3 {
        return vec![CheckRecord::skipped(
            "restriction to strata",
            anchor,
            "needs points on a line with n ≥ 3".into(),
        )];
    }
    let n = fam.n();
    let mut partitions = vec![std::iter::once(vec![0, 1])
        .chain((2..n).map(|j| vec![j]))
        .collect::<Vec<_>>()];
    if n >= 4 {
        partitions.push(
            std::iter::once(vec![0, 1])
                .chain(std::iter::once(vec![2, 3]))
                .chain((4..n).map(|j| vec![j]))
                .collect(),
        );
    }
    let mut out = Vec::new();
    for blocks in partitions {
        let name = format!("restriction to the stratum {blocks:?}");
        let strat = match stratum_family(fam, &blocks) {
            Ok(s) => s,
            Err(e) => {
                out.push(CheckRecord::skipped(&name, anchor, e.to_string()));
                continue;
            }
        };
        let mut w = Vec::new();
        for i in 0..ctx.points.len() as u64 {
            let x = match strat.sample_good_point(ctx.seed.wrapping_add(1000 + i)) {
                Ok(x) => x,
                Err(e) => {
                    w.push(e.to_string());
                    continue;
                }
            };
            match strata_restriction_k1(fam, &blocks, &x) {
                Ok(r) => w.extend(
                    r.checks
                        .iter()
                        .filter(|c| !c.holds)
                        .map(|c| format!("x={:?}: {}", r.x, c.name)),
                ),
                Err(e) => w.push(e.to_string()),
            }
        }
        out.push(CheckRecord::exact(&name, anchor, w));
    }
    out
}
