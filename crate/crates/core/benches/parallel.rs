use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use israte::conjugate::{legendre_conjugate, legendre_conjugate_brute_with, SampledFunction};
use israte::cumulant::{cgf_curves_with, TruncationWindow};
use israte::spectrum::{estimate_rate_curve_with, Backend, NSchedule, ShrinkSchedule};
use israte::{Execution, ExtReal, Gaussian, SourceSpec, UniformGrid};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn mixed() -> SourceSpec {
    SourceSpec::mixed(Gaussian::new(-1.0, 1.0).unwrap(), Gaussian::new(1.0, 1.0).unwrap(), [0.5, 0.5]).unwrap()
}

fn schedule() -> ShrinkSchedule {
    ShrinkSchedule::new(1, 5, NSchedule::geometric(1000, 10_000, 12, 5).unwrap()).unwrap()
}

fn rate_curve(c: &mut Criterion) {
    let src = mixed();
    let sch = schedule();
    let grid = UniformGrid::new(-3.0, 3.0, 0.01).unwrap();
    let mut group = c.benchmark_group("rate_curve");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| estimate_rate_curve_with(&src, &grid, &sch, Backend::Exact, exec).unwrap())
        });
    }
    group.finish();
}

fn cgf(c: &mut Criterion) {
    let src = mixed();
    let n = schedule().n;
    let theta = UniformGrid::new(-5.0, 5.0, 0.01).unwrap();
    let mut group = c.benchmark_group("cgf_curves");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| cgf_curves_with(&src, TruncationWindow::symmetric(8.0).unwrap(), &theta, &n, exec).unwrap())
        });
    }
    group.finish();
}

fn conjugation(c: &mut Criterion) {
    let mut group = c.benchmark_group("conjugation");
    for step in [0.01, 0.002] {
        let grid = UniformGrid::new(-5.0, 5.0, step).unwrap();
        let f =
            SampledFunction::from_fn(grid, |x| ExtReal::from(((x - 1.0).powi(2) / 2.0).min((x + 1.0).powi(2) / 2.0)))
                .unwrap();
        let theta = UniformGrid::new(-3.0, 3.0, step).unwrap();
        group.bench_with_input(BenchmarkId::new("hull_sweep", grid.len()), &f, |b, f| {
            b.iter(|| legendre_conjugate(f, &theta).unwrap())
        });
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("brute_{name}"), grid.len()), &f, |b, f| {
                b.iter(|| legendre_conjugate_brute_with(f, &theta, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, rate_curve, cgf, conjugation);
criterion_main!(benches);
