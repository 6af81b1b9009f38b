use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use semo_core::experiments::{execute_runs, run_scenario, ScenarioSpec};
use semo_core::RunConfig;

fn small_spec() -> ScenarioSpec {
    let mut spec = ScenarioSpec::scenario_two(2).with_runs(8);
    spec.a_values = vec![20, 40];
    spec
}

fn configs(spec: &ScenarioSpec) -> Vec<RunConfig> {
    let cells = spec.cells().unwrap();
    cells
        .iter()
        .flat_map(|c| {
            (0..spec.runs_per_cell as u64).map(move |i| {
                c.run_config(spec.base_seed, i, spec.max_evaluations)
                    .unwrap()
            })
        })
        .collect()
}

fn fan_out(c: &mut Criterion) {
    let spec = small_spec();
    let runs = configs(&spec);
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(2);

    let mut group = c.benchmark_group("execute_runs");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| execute_runs(&runs, 1).unwrap()));
    // Without the `parallel` feature this falls back to the sequential path.
    group.bench_with_input(BenchmarkId::new("parallel", threads), &threads, |b, &t| {
        b.iter(|| execute_runs(&runs, t).unwrap())
    });
    group.finish();

    let mut group = c.benchmark_group("run_scenario");
    group.sample_size(10);
    for t in [1, threads] {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| run_scenario(&spec, t).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, fan_out);
criterion_main!(benches);
