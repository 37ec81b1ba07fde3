use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use rflight::charfn::{laplace_numeric_roundtrip, Representation, SeriesEvaluator};
use rflight::coeffs::{derived_by_determinant, derived_by_recurrence};
use rflight::moments::mixed_moment_all_twos_series;
use rflight::simulate::{estimate_cf, McConfig};
use rflight::{Dimension, FlightParams, SeriesKind};

fn coefficient_tables(c: &mut Criterion) {
    let m = Dimension::new(3).unwrap();
    let mut g = c.benchmark_group("coefficients");
    for order in [20, 60] {
        g.bench_with_input(BenchmarkId::new("recurrence", order), &order, |b, &n| {
            b.iter(|| derived_by_recurrence(SeriesKind::TimeSeries, m, black_box(n)))
        });
    }
    g.bench_function("determinant/20", |b| {
        b.iter(|| derived_by_determinant(SeriesKind::TimeSeries, m, black_box(20)).unwrap())
    });
    g.bench_function("moments/20", |b| b.iter(|| mixed_moment_all_twos_series(m, black_box(20)).unwrap()));
    g.finish();
}

fn series_evaluation(c: &mut Criterion) {
    let p = FlightParams::new(4, 1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("cf");
    for (name, repr) in [("bessel", Representation::Bessel), ("time", Representation::TimePower)] {
        let ev = SeriesEvaluator::new(repr, &p, 2.0).unwrap();
        g.bench_function(format!("{name}/eval"), |b| b.iter(|| ev.eval(black_box(1.0), 1e-10).unwrap()));
        g.bench_function(format!("{name}/setup"), |b| {
            b.iter(|| SeriesEvaluator::new(repr, &p, black_box(2.0)).unwrap())
        });
    }
    g.bench_function("laplace-roundtrip", |b| {
        b.iter(|| laplace_numeric_roundtrip(&p, black_box(1.0), 2.0, 1e-9).unwrap())
    });
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let p = FlightParams::new(3, 1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("monte-carlo");
    g.sample_size(10);
    // sub-stream count changes the draws, not just the speed
    for w in [1, 4] {
        let cfg = McConfig::new(p, 1.0, 100_000, 42, w).unwrap();
        g.bench_with_input(BenchmarkId::new("cf-1e5", w), &cfg, |b, cfg| {
            b.iter(|| estimate_cf(cfg, &[1.0, 0.0, 0.0]).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, coefficient_tables, series_evaluation, monte_carlo);
criterion_main!(benches);
