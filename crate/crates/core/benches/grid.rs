use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dflm::bench::{run_grid, GridSpec};
use dflm::exec::Execution;
use dflm::lm::Method;
use dflm::probes::{probe_variance, ProbeProblem};
use dflm::suite;

fn grid(c: &mut Criterion) {
    let problems: Vec<_> = ["ex1", "ex4", "mgh9-mod-n50", "mgh10-mod-n50"]
        .iter()
        .map(|id| suite::lookup(id).unwrap())
        .collect();
    let spec = GridSpec::new(4, 1, 1e-3);
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    for mode in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| run_grid(&problems, &Method::ALL, &spec, mode).unwrap())
        });
    }
    group.finish();
}

fn probe_trials(c: &mut Criterion) {
    let probe = ProbeProblem::quadratic(6, 6, 1).unwrap();
    let x = probe.problem.x0.clone();
    let mut group = c.benchmark_group("variance_probe");
    group.sample_size(10);
    group.bench_function("10k_frames", |b| b.iter(|| probe_variance(&probe, &x, 0.1, 3, 10_000, 2).unwrap()));
    group.finish();
}

criterion_group!(benches, grid, probe_trials);
criterion_main!(benches);
