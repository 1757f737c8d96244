use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heatlaser::compare::{sweep_hot_occupation, NumericsOptions};
use heatlaser::models::presets;
use heatlaser::photonstats::{distribution_moments, scully_lamb_coefficients};
use heatlaser::solver::{wigner, WignerGrid};
use heatlaser::{build_liouvillian, DensityMatrix, Execution, HilbertSpace, C64};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.05 * (400.0f64).powf(k as f64 / (n - 1) as f64)).collect()
}

fn analytic_sweep(c: &mut Criterion) {
    let values = grid(2000);
    let mut group = c.benchmark_group("analytic_sweep_2000");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map(&values, |&nh| {
                    let coeffs = scully_lamb_coefficients(&presets::three_level_reference(nh));
                    distribution_moments(&coeffs).map(|m| m.mean).unwrap_or(f64::NAN)
                })
            })
        });
    }
    group.finish();
}

fn numeric_sweep(c: &mut Criterion) {
    let values = grid(16);
    let opts = NumericsOptions { n_max: Some(30), max_retries: 0, ..Default::default() };
    let base = presets::three_level_reference(1.0);
    let mut group = c.benchmark_group("numeric_sweep_16");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| sweep_hot_occupation(&base, black_box(&values), exec, &opts)));
    }
    group.finish();
}

fn wigner_grid(c: &mut Criterion) {
    let space = HilbertSpace::with_n_max(3, 40).unwrap();
    let cavity = heatlaser::solver::partial_trace_atom(&DensityMatrix::ground(&space), &space).unwrap();
    let grid = WignerGrid::default();
    let mut group = c.benchmark_group("wigner_101x101");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| wigner(&cavity, &grid, exec)));
    }
    group.finish();
}

fn liouvillian_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("liouvillian_matvec");
    for n_max in [20, 40] {
        let space = HilbertSpace::with_n_max(3, n_max).unwrap();
        let l = build_liouvillian(&presets::three_level_reference(1.0), &space).unwrap();
        let x = vec![C64::new(1e-3, 0.0); l.dim()];
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, l.dim()), &x, |b, x| b.iter(|| l.apply_vec(x, exec)));
        }
    }
    group.finish();
}

criterion_group!(benches, analytic_sweep, numeric_sweep, wigner_grid, liouvillian_matvec);
criterion_main!(benches);
