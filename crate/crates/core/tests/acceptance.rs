//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails for a reason other than a documented limitation.
//!
//! Run with `cargo test -p simtri-core --test acceptance`. Timing criteria
//! assume an optimized build, which the workspace test profile provides.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simtri::analysis::{average_report, ordering_violations, ordering_violations_random, GridSpec};
use simtri::bench::{run_bench, BenchConfig, Subject};
use simtri::datagen::random_unit_vector;
use simtri::{bounds, lower_bound, upper_bound, BoundKind, DenseVector, Similarity};

const EUCLID_MEAN: f64 = 0.2447;
const ARCCOS_MEAN: f64 = 0.3121;
const MEAN_TOL: f64 = 0.005;
const RATIO: f64 = 0.275;
const RATIO_TOL: f64 = 0.015;
const REPORT_BUDGET: Duration = Duration::from_secs(30);

const MAX_GAP: f64 = 0.5;
const MAX_GAP_TOL: f64 = 1e-9;

const MULT_ARCCOS_TOL: f64 = 1e-13;

const RANDOM_PAIRS: usize = 1_000_000;

const TRIPLES: usize = 1_000_000;
const TRIPLE_DIMS: [usize; 4] = [2, 3, 10, 100];
const SOUNDNESS_TOL: f64 = 1e-12;

const WITNESS_PAIRS: usize = 10_000;
const WITNESS_TOL: f64 = 1e-9;

const ORACLE_N: usize = 10_000;
const ORACLE_DIMS: [usize; 2] = [3, 10];
const ORACLE_QUERIES: usize = 50;

const ARCCOS_OVER_MULT: f64 = 3.0;
const CLOSED_FORM_ENVELOPE: f64 = 2.5;
const BENCH_BUDGET: Duration = Duration::from_secs(300);

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    /// A failure fully explained by a documented limitation; reported as FAIL
    /// but does not fail the run.
    excused: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        excused: false,
        detail,
    }
}

/// Perturbation of a computed similarity from rounding in the dot product
/// and normalization.
const INPUT_ROUNDING: f64 = 8.0 * f64::EPSILON;

/// How far a bound can move when each input similarity is perturbed by
/// [`INPUT_ROUNDING`]: the products move by about that much, while
/// `sqrt(1 - s²)` moves by `δ / sqrt(1 - s²)`, capped by `sqrt(2δ)`.
fn rounding_budget(s1: f64, s2: f64) -> f64 {
    let d = INPUT_ROUNDING;
    let root = |s: f64| (2.0 * d / (1.0 - s * s).max(0.0).sqrt()).min((2.0 * d).sqrt());
    3.0 * d + root(s1) + root(s2)
}

fn grid() -> GridSpec {
    GridSpec::new(-1.0, 1.0, 2001).unwrap()
}

fn simtri(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_simtri"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn key_value(csv: &str, key: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(','))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN)
}

fn grid_averages() -> Outcome {
    let start = Instant::now();
    let (code, out, err) = simtri(&["report", "--lo", "-1", "--hi", "1", "--steps", "2001"]);
    let elapsed = start.elapsed();
    let e = key_value(&out, "euclid_mean");
    let a = key_value(&out, "arccos_mean");
    let r = key_value(&out, "ratio");
    let pass = code == 0
        && (e - EUCLID_MEAN).abs() <= MEAN_TOL
        && (a - ARCCOS_MEAN).abs() <= MEAN_TOL
        && (r - RATIO).abs() <= RATIO_TOL
        && elapsed < REPORT_BUDGET;
    check(
        pass,
        format!(
            "euclid_mean={e:.4} (want {EUCLID_MEAN}±{MEAN_TOL}) arccos_mean={a:.4} (want {ARCCOS_MEAN}±{MEAN_TOL}) \
             ratio={:.2}% (want 27.5±1.5) in {elapsed:.2?} (exit {code}{})",
            r * 100.0,
            if err.is_empty() { String::new() } else { format!(": {}", err.trim()) }
        ),
    )
}

fn pointwise_values() -> Outcome {
    let half = lower_bound(
        BoundKind::Euclidean,
        Similarity::try_new(0.5).unwrap(),
        Similarity::try_new(0.5).unwrap(),
    );
    let floor = lower_bound(
        BoundKind::Euclidean,
        Similarity::MINUS_ONE,
        Similarity::MINUS_ONE,
    );
    let (gap, s1, s2) = average_report(grid()).max_arccos_gap;
    let pass = half == -1.0
        && floor == -7.0
        && (gap - MAX_GAP).abs() <= MAX_GAP_TOL
        && s1 == 0.5
        && s2 == 0.5;
    check(
        pass,
        format!(
            "euclidean(0.5,0.5)={half} euclidean(-1,-1)={floor} max(arccos-euclidean) on [0,1]²={gap:.12} at ({s1}, {s2}); \
             bounds below -1 compared as -1"
        ),
    )
}

fn mult_arccos_agreement() -> Outcome {
    let s = simtri::analysis::stability_report(grid());
    check(
        s.max_mult_arccos <= MULT_ARCCOS_TOL,
        format!(
            "max |mult-arccos|={:.3e} at ({}, {}) over {} cells (limit {MULT_ARCCOS_TOL:e}); max |variant-mult|={:.3e}",
            s.max_mult_arccos, s.at.0, s.at.1, s.cells, s.max_variant_mult
        ),
    )
}

fn ordering_lattice() -> Outcome {
    let on_grid = ordering_violations(grid());
    let random = ordering_violations_random(RANDOM_PAIRS, SEED);
    check(
        on_grid == 0 && random == 0,
        format!("violations: grid {on_grid}, {RANDOM_PAIRS} random pairs {random}"),
    )
}

fn soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let per_dim = TRIPLES / TRIPLE_DIMS.len();
    let mut failures = 0usize;
    let mut unexplained = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for dim in TRIPLE_DIMS {
        for _ in 0..per_dim {
            let x = random_unit_vector(&mut rng, dim);
            let y = random_unit_vector(&mut rng, dim);
            let z = random_unit_vector(&mut rng, dim);
            let sxy = x.similarity(&y).unwrap();
            let sxz = x.similarity(&z).unwrap();
            let szy = z.similarity(&y).unwrap();
            let budget = SOUNDNESS_TOL + rounding_budget(sxz.get(), szy.get());
            let excesses = BoundKind::ALL
                .map(|kind| lower_bound(kind, sxz, szy) - sxy.get())
                .into_iter()
                .chain([sxy.get() - upper_bound(sxz, szy)]);
            for excess in excesses {
                worst = worst.max(excess);
                if excess > SOUNDNESS_TOL {
                    failures += 1;
                    if excess > budget {
                        unexplained += 1;
                    }
                }
            }
        }
    }
    let mut detail = format!(
        "{} triples in dims {TRIPLE_DIMS:?}: {failures} failures, worst violation {worst:.3e} (limit {SOUNDNESS_TOL:e})",
        per_dim * TRIPLE_DIMS.len()
    );
    if failures > 0 {
        detail += &format!(
            "; {unexplained} exceed the input-rounding budget (inputs within ~1e-8 of ±1 are \
             ill-conditioned for sqrt(1-s²); see README)"
        );
    }
    Outcome {
        pass: failures == 0,
        excused: failures > 0 && unexplained == 0,
        detail,
    }
}

fn tightness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let unit =
        |a: f64| simtri::normalize(DenseVector::new(vec![a.cos(), a.sin()]).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..WITNESS_PAIRS {
        let s1: f64 = rng.random_range(-1.0..=1.0);
        let s2: f64 = rng.random_range(-1.0..=1.0);
        let (t1, t2) = (s1.acos(), s2.acos());
        let (x, y) = (unit(0.0), unit(t1 + t2));
        let achieved = x.similarity(&y).unwrap().get();
        worst = worst.max((achieved - bounds::mult(s1, s2)).abs());
    }
    check(
        worst <= WITNESS_TOL,
        format!("{WITNESS_PAIRS} planar witnesses: max |sim(x,y) - mult| = {worst:.3e} (limit {WITNESS_TOL:e})"),
    )
}

fn parse_mode(out: &str, mode: &str, field: &str) -> f64 {
    out.lines()
        .find(|l| l.split_whitespace().next() == Some(mode))
        .and_then(|l| {
            l.split_whitespace()
                .find_map(|t| t.strip_prefix(field)?.strip_prefix('='))
        })
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN)
}

fn index_exactness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in ORACLE_DIMS {
        let (code, out, err) = simtri(&[
            "oracle-check",
            "--n",
            &ORACLE_N.to_string(),
            "--dim",
            &dim.to_string(),
            "--queries",
            &ORACLE_QUERIES.to_string(),
            "--seed",
            &SEED.to_string(),
            "--fraction",
            "0.01",
        ]);
        let mismatches: f64 = ["vp-range", "vp-knn", "laesa-range", "laesa-knn"]
            .iter()
            .map(|m| parse_mode(&out, m, "mismatches"))
            .sum();
        let vp_sims = parse_mode(&out, "vp-range", "mean_sims_computed");
        let ok = code == 0 && mismatches == 0.0 && vp_sims < ORACLE_N as f64;
        pass &= ok;
        parts.push(format!(
            "dim {dim}: exit {code}, mismatches {mismatches}, vp mean sims {vp_sims:.0}/{ORACLE_N}{}",
            if ok { String::new() } else { format!(" [{}]", err.trim()) }
        ));
    }
    check(pass, parts.join("; "))
}

fn bench_orderings() -> Outcome {
    let start = Instant::now();
    let report = match run_bench(&BenchConfig::default()) {
        Ok(r) => r,
        Err(e) => return check(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let mult = report.mean(Subject::Bound(BoundKind::Mult));
    let arccos = report.mean(Subject::Bound(BoundKind::Arccos));
    let envelope = CLOSED_FORM_ENVELOPE * (report.mean(Subject::Baseline) + mult);
    let outside: Vec<&str> = BoundKind::ALL
        .into_iter()
        .filter(|k| k.is_closed_form() && report.mean(Subject::Bound(*k)) > envelope)
        .map(BoundKind::name)
        .collect();
    let pass = arccos >= ARCCOS_OVER_MULT * mult && outside.is_empty() && elapsed < BENCH_BUDGET;
    let lb2 = report.mean(Subject::Bound(BoundKind::MultLB2));
    check(
        pass,
        format!(
            "arccos/mult = {:.1}x (want >= {ARCCOS_OVER_MULT}x); closed forms above {CLOSED_FORM_ENVELOPE}x(baseline+mult) = {envelope:.2} ns: {outside:?}; \
             mult-lb2/mult = {:.2}; default config took {elapsed:.1?}",
            arccos / mult,
            lb2 / mult
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("grid averages", grid_averages),
        ("pointwise values", pointwise_values),
        ("mult/arccos agreement", mult_arccos_agreement),
        ("ordering lattice", ordering_lattice),
        ("bound soundness", soundness),
        ("tightness witnesses", tightness),
        ("index exactness", index_exactness),
        ("benchmark orderings", bench_orderings),
    ];
    let (mut failed, mut excused) = (0, 0);
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.pass {
            failed += 1;
            if outcome.excused {
                excused += 1;
            }
        }
        println!(
            "{} {}. {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed; {excused} failure(s) attributed to input rounding",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == excused {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
