use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use isslab_bench::bench_grid;
use isslab_core::grid::State;
use isslab_core::models::{self, Scheme};
use isslab_core::operators::{dirichlet_laplacian, solve_shifted};
use isslab_core::picard::{picard_solve, PicardConfig};

fn thomas_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("thomas_solve");
    for n in [64usize, 256, 1024] {
        let op = dirichlet_laplacian(n).unwrap();
        let rhs = bench_grid(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_shifted(&op, black_box(1.0), &rhs).unwrap())
        });
    }
    group.finish();
}

fn imex_step_throughput(c: &mut Criterion) {
    let mut group = c.benchmark_group("semilinear_step");
    let n = 128;
    let dt = 1e-3;

    let burgers = models::burgers_l2(n).unwrap();
    let z_b = State::Single(bench_grid(n, 2).scaled_re(0.1));
    group.bench_function("burgers_l2", |b| {
        b.iter(|| {
            let forcing = burgers.inject_input(&burgers.eval_n(&z_b, &z_b));
            burgers.step(Scheme::ImplicitEuler, dt, 0.0, &z_b, &forcing).unwrap()
        })
    });

    let wave = models::wave(n).unwrap();
    let z_w = wave.eigenmode_state(1).scaled_re(0.1);
    group.bench_function("wave", |b| {
        b.iter(|| {
            let forcing = wave.inject_input(&wave.eval_n(&z_w, &z_w));
            wave.step(Scheme::ImplicitEuler, dt, 0.0, &z_w, &forcing).unwrap()
        })
    });
    group.finish();
}

fn hminus1_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("hminus1_norm");
    for n in [64usize, 128, 256] {
        let m = models::burgers_l2(n).unwrap();
        let f = bench_grid(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| m.u_norm(black_box(&f)))
        });
    }
    group.finish();
}

fn picard_small_run(c: &mut Criterion) {
    let n = 64;
    let m = models::burgers_l2(n).unwrap();
    let mode = m.eigenmode_state(1);
    let z0 = mode.scaled_re(0.01 / m.x_norm(&mode));
    let cfg = PicardConfig { omega: 1.0, epsilon: 0.05, tol: 1e-9, max_iter: 30 };
    c.bench_function("picard_burgers_l2_n64_T1", |b| {
        b.iter(|| picard_solve(&m, &z0, None, &cfg, 1.0, 1e-2).unwrap())
    });
}

criterion_group!(benches, thomas_solve, imex_step_throughput, hminus1_norm, picard_small_run);
criterion_main!(benches);
