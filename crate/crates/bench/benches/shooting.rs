use criterion::{black_box, criterion_group, criterion_main, Criterion};
use radshoot_core::scan::{sweep, theorem5_pipeline, SweepOptions, Theorem5Config};
use radshoot_core::weights::eval_big_h;
use radshoot_core::{
    classify_alpha, identity_3_3, integrate, BumpFunction, ProblemSpec, Tolerances, WeightFunction,
};

fn explicit() -> ProblemSpec {
    ProblemSpec::new(3, -0.5, -0.5, 4.0, WeightFunction::PurePower { l: -0.5 }).unwrap()
}

fn example_iii() -> ProblemSpec {
    ProblemSpec::new(
        3,
        -1.0,
        -1.0,
        2.5,
        WeightFunction::ExampleIii {
            n: 3,
            l: -1.0,
            p: 2.5,
        },
    )
    .unwrap()
}

fn construction(points: usize) -> Theorem5Config {
    Theorem5Config {
        bump: BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap(),
        epsilon: 0.2,
        alpha_star: 1.0,
        delta: 0.1,
        r_star: 2.25,
        alpha_min: 0.1,
        alpha_max: 1000.0,
        points,
    }
}

fn shots(c: &mut Criterion) {
    let tol = Tolerances::default();
    let spec = explicit();
    c.bench_function("integrate_explicit_1e3", |b| {
        b.iter(|| integrate(&spec, black_box(1.0), &tol, 1e3).unwrap())
    });
    c.bench_function("classify_explicit", |b| {
        b.iter(|| classify_alpha(&spec, black_box(1.0), &tol).unwrap())
    });
    let e3 = example_iii();
    c.bench_function("classify_example_iii", |b| {
        b.iter(|| classify_alpha(&e3, black_box(1.0), &tol).unwrap())
    });
    let traj = integrate(&e3, 1.0, &tol, 1e3).unwrap();
    c.bench_function("identity_example_iii_r10", |b| {
        b.iter(|| identity_3_3(&e3, &traj, black_box(10.0), &tol).unwrap())
    });
}

fn weights(c: &mut Criterion) {
    let w = WeightFunction::ShiftedPower {
        a: 9.0 / 8.0,
        b: 1.0,
        mu: -0.75,
        nu: -1.0,
    };
    c.bench_function("big_h_shifted_r10", |b| {
        b.iter(|| eval_big_h(&w, black_box(10.0), 3, -1.5, 1e-10).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    let e3 = example_iii();
    let grid: Vec<f64> = (0..=16)
        .map(|i| 10f64.powf(-2.0 + 0.25 * i as f64))
        .collect();
    g.bench_function("example_iii_17", |b| {
        b.iter(|| sweep(&e3, &grid, &tol, &SweepOptions::default()).unwrap())
    });
    let base = explicit();
    let cfg = construction(9);
    g.bench_function("constructed_pipeline_9", |b| {
        b.iter(|| theorem5_pipeline(&cfg, &base, &tol, &SweepOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, shots, weights, sweeps);
criterion_main!(benches);
