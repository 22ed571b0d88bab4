//! Command-line front end: loads a family config, runs identity suites and
//! writes versioned JSON reports.

mod report;
mod suites;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as Complex;
use rayon::prelude::*;
use serde::Serialize;

use arrfrob::critalg::{solve_critical, WAlgebra};
use arrfrob::family::{subsets, FamilyConfig};
use arrfrob::frobenius::{period_map, potential_report};
use arrfrob::gaussmanin::{flow_flat_section, FlowOptions, Polyline};
use arrfrob::osflag::{singular_subspace, v_vector};
use arrfrob::scalar::{
    binomial, format_complex, format_f64, format_rational, int, to_complex, Rational,
};
use arrfrob::{ArrangementFamily, Error};

use report::{CheckReport, Envelope, Status};
use suites::{run_suite, Suite, SuiteContext, ALL_SUITES};

#[derive(Parser, Debug)]
#[command(
    name = "arrfrob",
    version,
    about = "Identity suites for families of generic affine arrangements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Family config (JSON with k, n, b, weights and optional z).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Index left out of the w-basis [default: n - 1].
    #[arg(long)]
    anchor: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run identity suites over seeded base points.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = ALL_SUITES.to_vec())]
        suites: Vec<Suite>,
        /// Tolerance for numeric checks.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Base points per suite.
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// List circuits with their relations.
    Circuits {
        #[command(flatten)]
        common: Common,
    },
    /// Singular vectors, the w-basis and the Gram matrix.
    Basis {
        #[command(flatten)]
        common: Common,
    },
    /// Critical points of the master function at the config point or a seeded one.
    Critical {
        #[command(flatten)]
        common: Common,
    },
    /// Both sides of the second-potential identity.
    Potential {
        #[command(flatten)]
        common: Common,
        /// Number of random index tuples besides those from one circuit.
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Transport a flat section once around a polygonal loop.
    GmFlow {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 17.0)]
        kappa: f64,
        /// Vertices of the loop polygon.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Radius of the loop traced by one coordinate.
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
        /// Coordinate that moves.
        #[arg(long, default_value_t = 0)]
        coordinate: usize,
        /// `q` for the period map, or the position of a singular basis vector.
        #[arg(long, default_value = "0")]
        initial: String,
    },
}

enum Failure {
    Usage(String),
    Identity(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Weights(_) | Error::NotGeneric(_) | Error::Dimension(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Identity(other.to_string()),
        }
    }
}

struct Loaded {
    cfg: FamilyConfig,
    family: ArrangementFamily,
    anchor: usize,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let doc = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let cfg = FamilyConfig::from_json(&doc)?;
    let family = cfg.family()?;
    let anchor = common.anchor.unwrap_or(family.n() - 1);
    if anchor >= family.n() {
        return Err(Failure::Usage(format!(
            "anchor {anchor} is out of range for n = {}",
            family.n()
        )));
    }
    Ok(Loaded {
        cfg,
        family,
        anchor,
    })
}

fn base_point(
    cfg: &FamilyConfig,
    family: &ArrangementFamily,
    seed: u64,
) -> Result<Vec<Rational>, Failure> {
    match cfg.base_point()? {
        Some(z) => {
            family.require_good_fiber(&z)?;
            Ok(z)
        }
        None => Ok(family.sample_good_point(seed)?),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            say(text);
            Ok(())
        }
    }
}

/// Prints a line to stdout, ignoring a closed pipe.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn zs(z: &[Rational]) -> Vec<String> {
    z.iter().map(format_rational).collect()
}

fn run_check(common: &Common, suites: &[Suite], tol: f64, samples: usize) -> Result<bool, Failure> {
    let Loaded { family, anchor, .. } = load(common)?;
    if samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let ctx = SuiteContext::new(&family, common.seed, tol, samples, anchor)?;
    let records: Vec<_> = suites.par_iter().map(|&s| run_suite(s, &ctx)).collect();
    for suite in &records {
        for c in &suite.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let err = c
                .error
                .as_deref()
                .map(|e| format!(" err={e}"))
                .unwrap_or_default();
            say(&format!("{tag} {}/{}{err}", suite.suite, c.identity));
            if c.status != Status::Pass {
                for w in c.witnesses.iter().take(5) {
                    say(&format!("    {w}"));
                }
            }
        }
    }
    let report = CheckReport::new(
        family.describe(),
        common.seed,
        tol,
        samples,
        anchor,
        records,
    );
    if let Some(p) = &common.json {
        emit(Some(p), &to_json(&report))?;
    }
    Ok(report.passed)
}

#[derive(Serialize)]
struct CircuitOut {
    indices: Vec<usize>,
    lambda: Vec<String>,
}

#[derive(Serialize)]
struct CircuitsBody {
    circuits: Vec<CircuitOut>,
}

fn run_circuits(common: &Common) -> Result<bool, Failure> {
    let Loaded { family, .. } = load(common)?;
    let circuits = family
        .circuits()
        .iter()
        .map(|c| CircuitOut {
            indices: c.indices.clone(),
            lambda: c.lambda.iter().map(format_rational).collect(),
        })
        .collect();
    emit(
        common.json.as_deref(),
        &to_json(&Envelope::new(family.describe(), CircuitsBody { circuits })),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct BasisBody {
    flags: Vec<Vec<usize>>,
    singular_basis: Vec<Vec<String>>,
    w_basis: Vec<Vec<usize>>,
    v_vectors: Vec<Vec<String>>,
    gram: Vec<Vec<String>>,
    gram_det: String,
}

fn run_basis(common: &Common) -> Result<bool, Failure> {
    let Loaded { family, anchor, .. } = load(common)?;
    let sing = singular_subspace(&family)?;
    let alg = WAlgebra::new(&family, anchor)?;
    let fmt = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
    let gram = sing.gram();
    let body = BasisBody {
        flags: family.index().subsets().to_vec(),
        singular_basis: sing.basis().iter().map(|b| fmt(b.coeffs())).collect(),
        w_basis: alg.basis().to_vec(),
        v_vectors: alg
            .basis()
            .iter()
            .map(|t| fmt(v_vector(&family, t).coeffs()))
            .collect(),
        gram: (0..gram.rows())
            .map(|i| {
                (0..gram.cols())
                    .map(|j| format_rational(&gram[(i, j)]))
                    .collect()
            })
            .collect(),
        gram_det: format_rational(&gram.det()),
    };
    emit(
        common.json.as_deref(),
        &to_json(&Envelope::new(family.describe(), body)),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct PointOut {
    t: Vec<String>,
    hess: String,
    residual: String,
}

#[derive(Serialize)]
struct CriticalBody {
    z: Vec<String>,
    points: Vec<PointOut>,
    expected_count: usize,
}

fn run_critical(common: &Common) -> Result<bool, Failure> {
    let Loaded { cfg, family, .. } = load(common)?;
    let z = base_point(&cfg, &family, common.seed)?;
    let points = solve_critical(&family, &z)?;
    let expected = binomial(family.n() - 1, family.k());
    let body = CriticalBody {
        z: zs(&z),
        points: points
            .iter()
            .map(|p| PointOut {
                t: p.t.iter().map(format_complex).collect(),
                hess: format_complex(&p.hessian_det),
                residual: format_f64(p.residual),
            })
            .collect(),
        expected_count: expected,
    };
    let ok = points.len() == expected;
    emit(
        common.json.as_deref(),
        &to_json(&Envelope::new(family.describe(), body)),
    )?;
    Ok(ok)
}

fn run_potential(common: &Common, samples: usize) -> Result<bool, Failure> {
    use rand::{Rng, SeedableRng};
    let Loaded {
        cfg,
        family,
        anchor,
    } = load(common)?;
    let z = base_point(&cfg, &family, common.seed)?;
    let k = family.k();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    if let Some(c) = family.circuits().first() {
        // Every multiset of size 2k+1 from the first circuit, by stars and bars.
        for combo in subsets(c.len() + 2 * k, 2 * k + 1).into_iter().take(40) {
            tuples.push(
                combo
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| c.indices[x - i])
                    .collect(),
            );
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(common.seed);
    tuples.extend((0..samples).map(|_| {
        (0..2 * k + 1)
            .map(|_| rng.random_range(0..family.n()))
            .collect()
    }));
    let report = potential_report(&family, &z, &tuples, anchor)?;
    let ok = report.passed();
    emit(
        common.json.as_deref(),
        &to_json(&Envelope::new(family.describe(), report)),
    )?;
    Ok(ok)
}

fn run_gm_flow(
    common: &Common,
    kappa: f64,
    steps: usize,
    radius: f64,
    coordinate: usize,
    initial: &str,
) -> Result<bool, Failure> {
    let Loaded {
        cfg,
        family,
        anchor,
    } = load(common)?;
    if coordinate >= family.n() || steps < 3 || radius <= 0.0 {
        return Err(Failure::Usage(
            "need a valid coordinate, at least 3 steps and a positive radius".into(),
        ));
    }
    let z = base_point(&cfg, &family, common.seed)?;
    let start = match initial {
        "q" => period_map(&family, &z, anchor, &int(1))?.to_scalar::<Complex>(),
        s => {
            let pos: usize = s.parse().map_err(|_| {
                Failure::Usage(format!("--initial must be `q` or an index, got `{s}`"))
            })?;
            let sing = singular_subspace(&family)?;
            sing.basis()
                .get(pos)
                .ok_or_else(|| {
                    Failure::Usage(format!("singular basis has {} vectors", sing.dim()))
                })?
                .to_scalar::<Complex>()
        }
    };
    let zc: Vec<Complex> = z.iter().map(to_complex).collect();
    // The loop passes through z and is centered at z_c + radius.
    let vertices: Vec<Vec<Complex>> = (0..=steps)
        .map(|s| {
            let theta = std::f64::consts::TAU * s as f64 / steps as f64;
            let mut p = zc.clone();
            p[coordinate] += Complex::from(radius) - Complex::from_polar(radius, theta);
            p
        })
        .collect();
    let traj = flow_flat_section(
        &family,
        Complex::from(kappa),
        &Polyline { vertices },
        &start,
        &FlowOptions::default(),
        None,
    )?;
    let (a, b) = (traj.first(), traj.last());
    let scale = a
        .state
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let drift = a
        .state
        .iter()
        .zip(&b.state)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale;
    eprintln!(
        "return discrepancy {} over {} accepted steps",
        format_f64(drift),
        traj.samples.len() - 1
    );
    emit(common.json.as_deref(), traj.to_jsonl().trim_end())?;
    Ok(true)
}

fn init_threads() {
    if let Some(n) = std::env::var("ARRFROB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = match &cli.command {
        Command::Check {
            common,
            suites,
            tol,
            samples,
        } => run_check(common, suites, *tol, *samples),
        Command::Circuits { common } => run_circuits(common),
        Command::Basis { common } => run_basis(common),
        Command::Critical { common } => run_critical(common),
        Command::Potential { common, samples } => run_potential(common, *samples),
        Command::GmFlow {
            common,
            kappa,
            steps,
            radius,
            coordinate,
            initial,
        } => run_gm_flow(common, *kappa, *steps, *radius, *coordinate, initial),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Identity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
