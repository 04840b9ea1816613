use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use microgrid_bench::{prepared_preset, preset_dispatch_model};
use microgrid_core::der::{aggregate_demand, simulate_population};
use microgrid_core::milp::{solve_milp, SolveOptions};
use microgrid_core::scheduler::{mpc_step, run_prepared, SimState};

fn dispatch_milp(c: &mut Criterion) {
    let mut group = c.benchmark_group("dispatch_milp");
    let opts = SolveOptions::default();
    for price in [15.0, 25.0, 35.0] {
        let dm = preset_dispatch_model(price);
        group.bench_with_input(BenchmarkId::new("solve_day", price), &dm, |b, dm| {
            b.iter(|| solve_milp(black_box(&dm.model), &opts).unwrap())
        });
    }
    group.finish();
}

fn population(c: &mut Criterion) {
    let p = prepared_preset();
    c.bench_function("population/simulate_day", |b| {
        b.iter(|| {
            let mut pop = p.population.clone();
            simulate_population(black_box(&mut pop), &[15.0; 24])
        })
    });
    c.bench_function("population/aggregate_demand", |b| {
        b.iter(|| aggregate_demand(black_box(&p.population), 15.0))
    });
}

fn scheduling(c: &mut Criterion) {
    let p = prepared_preset();
    c.bench_function("mpc/first_step", |b| {
        b.iter(|| {
            let mut state = SimState::new(&p);
            mpc_step(&mut state, black_box(&p), 0).unwrap()
        })
    });
    let mut group = c.benchmark_group("mpc");
    group.sample_size(10);
    group.bench_function("full_day", |b| {
        b.iter(|| run_prepared(black_box(&p)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, dispatch_milp, population, scheduling);
criterion_main!(benches);
