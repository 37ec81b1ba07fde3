//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances, sample sizes and time budgets are pinned
//! below.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rflight::coeffs::{
    base, derived_by_determinant, derived_by_recurrence, dual, gamma_even_odd_split, one_minus_lambda_zf_coefficient,
    zf_coefficient,
};
use rflight::exactpoly::LambdaPoly;
use rflight::moments::{eval_moment_series, mixed_moment_all_ones, mixed_moment_all_twos_series};
use rflight::simulate::{
    check_support, estimate_direction_second_moment, estimate_mixed_moment, estimate_no_switch_fraction, McConfig,
    McEstimate,
};
use rflight::specfun::rational;
use rflight::validate::{
    check_cross_representation, check_lambda_zero, check_laplace, check_monte_carlo, CheckReport, CompareConfig,
    MC_GATE, MC_RETRY_GATE,
};
use rflight::{BivariatePoly, Dimension, FlightParams, Rational, SeriesKind};

const DIMENSIONS: [u32; 4] = [3, 4, 5, 6];
const PROPERTY_ORDER: usize = 20;
const MC_SAMPLES: u64 = 1_000_000;
const LONG_MC_SAMPLES: u64 = 10_000_000;
const SEED: u64 = 42;
const TWO_TERM_VALUE: f64 = 0.00183921;
const TWO_TERM_TOL: f64 = 5e-9;
const EXTENDED_ORDER: usize = 20;
const INVARIANT_GATE: f64 = 4.0;
const SUPPORT_SLACK: f64 = 1e-12;

const BUDGET_1: Duration = Duration::from_secs(1);
const BUDGET_2: Duration = Duration::from_secs(30);
const BUDGET_3: Duration = Duration::from_secs(10);
const BUDGET_5: Duration = Duration::from_secs(30);
const BUDGET_6: Duration = Duration::from_secs(60);
const BUDGET_7: Duration = Duration::from_secs(180);

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn dim(m: u32) -> Dimension {
    Dimension::new(m).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

/// Runs one criterion and prints its line. A criterion with a time budget
/// fails when it overruns.
fn criterion(id: &str, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            out.passed = false;
            out.detail = format!("{}; over budget {:.0?}", out.detail, b);
        }
    }
    let tag = if out.passed { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id}: {title} [{:.2?}] {}", elapsed, out.detail);
    out.passed
}

fn from_check(r: &CheckReport) -> Outcome {
    outcome(
        r.passed,
        format!(
            "{} points, max deviation {:.3e} vs {:.1e} at {}{}",
            r.points,
            r.max_deviation,
            r.threshold,
            r.worst,
            if r.retried > 0 { format!(", {} retried", r.retried) } else { String::new() }
        ),
    )
}

/// Golden monomial `coeff(m) λ^dl v^dv`.
type Golden = (u32, u32, fn(i64) -> Rational);

fn one(_: i64) -> Rational {
    Rational::one()
}

fn r(n: i64, d: i64) -> Rational {
    rational(n, d)
}

/// Closed forms in `m` of `ζ_0..ζ_5`.
fn zeta_golden() -> Vec<Vec<Golden>> {
    vec![
        vec![],
        vec![(0, 0, one)],
        vec![(1, 0, one)],
        vec![(2, 0, one), (0, 1, |m| r(m - 2, 2 * m))],
        vec![(3, 0, one), (1, 1, |m| r(m - 2, m))],
        vec![(4, 0, one), (2, 1, |m| r(3 * (m - 2), 2 * m)), (0, 2, |m| r(3 * (m - 2), 8 * (m + 2)))],
    ]
}

/// Closed forms in `m` of `γ_0..γ_8`.
fn gamma_golden() -> Vec<Vec<Golden>> {
    vec![
        vec![],
        vec![(0, 0, one)],
        vec![(1, 0, one)],
        vec![(2, 0, one), (0, 1, |m| r(-1, m))],
        vec![(3, 0, one), (1, 1, |m| r(-2, m))],
        vec![(4, 0, one), (2, 1, |m| r(-3, m)), (0, 2, |m| r(3, m * (m + 2)))],
        vec![(5, 0, one), (3, 1, |m| r(-4, m)), (1, 2, |m| r(7 * m + 2, m * m * (m + 2)))],
        vec![
            (6, 0, one),
            (4, 1, |m| r(-5, m)),
            (2, 2, |m| r(6 * (2 * m + 1), m * m * (m + 2))),
            (0, 3, |m| r(-15, m * (m + 2) * (m + 4))),
        ],
        vec![
            (7, 0, one),
            (5, 1, |m| r(-6, m)),
            (3, 2, |m| r(6 * (3 * m + 2), m * m * (m + 2))),
            (1, 3, |m| r(-12 * (3 * m + 2), m * m * (m + 2) * (m + 4))),
        ],
    ]
}

fn instantiate(golden: &[Golden], m: u32) -> BivariatePoly {
    BivariatePoly::from_terms(golden.iter().map(|(dl, dv, f)| (*dl, *dv, f(i64::from(m)))))
}

fn criterion_1() -> Outcome {
    let mut bad = Vec::new();
    for m in DIMENSIONS {
        for (kind, golden) in [(SeriesKind::BesselSeries, zeta_golden()), (SeriesKind::TimeSeries, gamma_golden())] {
            let table = derived_by_recurrence(kind, dim(m), golden.len() - 1);
            for (n, g) in golden.iter().enumerate() {
                if table.derived[n] != instantiate(g, m) {
                    bad.push(format!("{kind} m={m} n={n}"));
                }
            }
        }
    }
    // printed m = 3 forms of γ_7 and γ_8
    let g = derived_by_recurrence(SeriesKind::TimeSeries, dim(3), 8);
    let g7 = BivariatePoly::from_terms([(6, 0, r(1, 1)), (4, 1, r(-5, 3)), (2, 2, r(14, 15)), (0, 3, r(-1, 7))]);
    let g8 = BivariatePoly::from_terms([(7, 0, r(1, 1)), (5, 1, r(-2, 1)), (3, 2, r(22, 15)), (1, 3, r(-44, 105))]);
    if g.derived[7] != g7 {
        bad.push("gamma_7 at m=3".into());
    }
    if g.derived[8] != g8 {
        bad.push("gamma_8 at m=3".into());
    }
    outcome(bad.is_empty(), if bad.is_empty() { "zeta_0..5, gamma_0..8, m=3..6, exact".into() } else { bad.join("; ") })
}

fn criterion_2() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for m in DIMENSIONS {
        for kind in [SeriesKind::BesselSeries, SeriesKind::TimeSeries] {
            let table = derived_by_recurrence(kind, dim(m), PROPERTY_ORDER);
            for n in 2..=PROPERTY_ORDER {
                checked += 1;
                match derived_by_determinant(kind, dim(m), n) {
                    Ok(p) if p == table.derived[n] => {}
                    _ => bad.push(format!("{kind} m={m} n={n}")),
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} determinants, mismatches: [{}]", bad.join("; ")))
}

/// First pass at 3σ, one rerun with another seed at 4σ.
fn gated(first: f64, retry: impl FnOnce() -> f64) -> (bool, String) {
    if first <= MC_GATE {
        return (true, format!("z = {first:.2}"));
    }
    let second = retry();
    (second <= MC_RETRY_GATE, format!("z = {first:.2}, retry z = {second:.2}"))
}

fn moment_z(params: FlightParams, t: f64, q: &[u32], samples: u64, seed: u64, target: f64) -> (McEstimate, f64) {
    let cfg = McConfig::new(params, t, samples, seed, workers()).unwrap();
    let est = estimate_mixed_moment(&cfg, q).unwrap();
    (est, est.z_score(target))
}

fn criterion_7() -> Outcome {
    let m3 = dim(3);
    let params = FlightParams::new(3, 5.0, 3.0).unwrap();
    let t = 0.3;
    let mut notes = Vec::new();

    // (a)
    let ones = mixed_moment_all_ones(m3);
    let a_series = ones.is_zero() && eval_moment_series(&ones, 5.0, 3.0, t).unwrap() == 0.0;
    let (_, z) = moment_z(params, t, &[1, 1, 1], MC_SAMPLES, SEED, 0.0);
    let (a_mc, note) = gated(z, || moment_z(params, t, &[1, 1, 1], MC_SAMPLES, SEED + 1, 0.0).1);
    notes.push(format!("(a) {note}"));

    // (b)
    let two = mixed_moment_all_twos_series(m3, 7).unwrap();
    let b = two.power_coefficient(6) == LambdaPoly::from([(0, r(1, 105))])
        && two.power_coefficient(7) == LambdaPoly::from([(1, r(44, 11025))])
        && two.deg_c() == 6
        && (0..6).all(|n| two.power_coefficient(n).is_empty());

    // (c)
    let value = eval_moment_series(&two, 5.0, 3.0, t).unwrap();
    let c = (value - TWO_TERM_VALUE).abs() <= TWO_TERM_TOL;
    notes.push(format!("(c) {value:.10}"));

    // (d)
    let long = mixed_moment_all_twos_series(m3, EXTENDED_ORDER).unwrap();
    let target = eval_moment_series(&long, 5.0, 3.0, t).unwrap();
    let (est, z) = moment_z(params, t, &[2, 2, 2], LONG_MC_SAMPLES, SEED, target);
    let (d, note) = gated(z, || moment_z(params, t, &[2, 2, 2], LONG_MC_SAMPLES, SEED + 1, target).1);
    notes.push(format!("(d) series {target:.8} mc {:.8}±{:.1e} {note}", est.mean, est.stderr));

    let parts = [("a", a_series && a_mc), ("b", b), ("c", c), ("d", d)];
    let failed: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0).collect();
    let detail =
        if failed.is_empty() { notes.join(", ") } else { format!("failed parts {failed:?}; {}", notes.join(", ")) };
    outcome(failed.is_empty(), detail)
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_z = 0.0f64;

    let params = FlightParams::new(3, 1.0, 1.0).unwrap();
    let cfg = McConfig::new(params, 1.0, MC_SAMPLES, SEED, workers()).unwrap();
    let support = check_support(&cfg);
    if support.violations > 0 || support.max_ratio > 1.0 + SUPPORT_SLACK || support.samples != MC_SAMPLES {
        failures.push(format!("support {support:?}"));
    }

    for lambda in [0.5, 1.0, 2.0] {
        for t in [0.5, 1.0] {
            let p = FlightParams::new(3, lambda, 1.0).unwrap();
            let cfg = McConfig::new(p, t, MC_SAMPLES, SEED, workers()).unwrap();
            let z = estimate_no_switch_fraction(&cfg).z_score((-lambda * t).exp());
            worst_z = worst_z.max(z);
            if z > INVARIANT_GATE {
                failures.push(format!("no-switch lambda={lambda} t={t} z={z:.2}"));
            }
        }
    }

    for m in DIMENSIONS {
        for j in [0, m as usize - 1] {
            let est = estimate_direction_second_moment(m as usize, j, MC_SAMPLES, SEED, workers()).unwrap();
            let z = est.z_score(1.0 / f64::from(m));
            worst_z = worst_z.max(z);
            if z > INVARIANT_GATE {
                failures.push(format!("direction m={m} j={j} z={z:.2}"));
            }
        }
    }
    let detail = format!(
        "max |x|/ct = {:.15}, worst z = {worst_z:.2} vs {INVARIANT_GATE}{}",
        support.max_ratio,
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    outcome(failures.is_empty(), detail)
}

fn criterion_9() -> Outcome {
    let mut bad = Vec::new();
    let lambda = BivariatePoly::lambda();
    let samples = [r(3, 7), r(-2, 5), r(1, 1)];
    for m in DIMENSIONS {
        let md = dim(m);
        let mr = Rational::from_integer(i64::from(m).into());
        for kind in [SeriesKind::BesselSeries, SeriesKind::TimeSeries] {
            let table = derived_by_recurrence(kind, md, PROPERTY_ORDER);
            for n in 1..=PROPERTY_ORDER as u32 {
                let b = base(kind, n, md);
                // dual = -λ · base
                if dual(kind, n, md) != -(&lambda * &b) {
                    bad.push(format!("{kind} m={m} n={n}: dual"));
                }
                // base and dual against the hypergeometric generating functions
                let (beta, sign) = match kind {
                    SeriesKind::BesselSeries => ((&mr - r(2, 1)) / r(2, 1), Rational::one()),
                    SeriesKind::TimeSeries => (Rational::one(), -Rational::one()),
                };
                for v in &samples {
                    let bz = &sign * v;
                    let xi = zf_coefficient(&r(1, 2), &beta, &(&mr / r(2, 1)), &bz, n).unwrap();
                    let lam = r(5, 3);
                    let eta = one_minus_lambda_zf_coefficient(&r(1, 2), &beta, &(&mr / r(2, 1)), &bz, &lam, n).unwrap();
                    let at = |p: &BivariatePoly| {
                        p.terms().fold(Rational::zero(), |acc, ((dl, dv), c)| {
                            acc + c
                                * num_traits::pow(lam.clone(), dl as usize)
                                * num_traits::pow(v.clone(), dv as usize)
                        })
                    };
                    if at(&b) != xi || at(&dual(kind, n, md)) != eta {
                        bad.push(format!("{kind} m={m} n={n}: generating function"));
                    }
                }
                // even-index zeros
                if n % 2 == 0 && !b.is_zero() {
                    bad.push(format!("{kind} m={m} n={n}: even index"));
                }
                let d = &table.derived[n as usize];
                // degree law
                if d.deg_v() != Some((n - 1) / 2) {
                    bad.push(format!("{kind} m={m} n={n}: deg_v"));
                }
                if kind == SeriesKind::TimeSeries && d.deg_lambda() != Some(n - 1) {
                    bad.push(format!("{kind} m={m} n={n}: deg_lambda"));
                }
                // v = 0 collapse
                let at_zero: Vec<_> = d.terms().filter(|((_, dv), _)| *dv == 0).collect();
                if at_zero.len() != 1 || at_zero[0].0 != (n - 1, 0) || !at_zero[0].1.is_one() {
                    bad.push(format!("{kind} m={m} n={n}: v=0"));
                }
            }
        }
        let split = gamma_even_odd_split(md, PROPERTY_ORDER);
        let plain = derived_by_recurrence(SeriesKind::TimeSeries, md, PROPERTY_ORDER);
        if split.derived != plain.derived {
            bad.push(format!("m={m}: split recurrences"));
        }
    }
    outcome(bad.is_empty(), format!("n <= {PROPERTY_ORDER}, m = 3..6, violations: [{}]", bad.join("; ")))
}

fn main() {
    let grid = CompareConfig { samples: MC_SAMPLES, seed: SEED, workers: workers(), ..CompareConfig::default() };
    let results = [
        criterion("1", "symbolic golden tables", Some(BUDGET_1), criterion_1),
        criterion("2", "determinant equals recurrence", Some(BUDGET_2), criterion_2),
        criterion("3", "Bessel series vs time series", Some(BUDGET_3), || {
            from_check(&check_cross_representation(&grid))
        }),
        criterion("4", "lambda = 0 limit", None, || from_check(&check_lambda_zero(&grid))),
        criterion("5", "Laplace round trip", Some(BUDGET_5), || from_check(&check_laplace(&grid))),
        criterion("6", "Monte Carlo concordance", Some(BUDGET_6), || from_check(&check_monte_carlo(&grid))),
        criterion("7", "mixed moments", Some(BUDGET_7), criterion_7),
        criterion("8", "model invariants", None, criterion_8),
        criterion("9", "property suite", None, criterion_9),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
