use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use risdoa::anm::{solve_danm_with, solve_full_anm, FullAnmInput, Mode, SolverConfig};
use risdoa_bench::fixture;

fn config(noise_power: f64, samples: usize) -> SolverConfig {
    SolverConfig {
        accept_unconverged: true,
        max_iterations: 20_000,
        full_size_cap: 256,
        ..SolverConfig::default().with_tolerance(1e-3).with_mode(Mode::NoiseBall { noise_power: noise_power * samples as f64 })
    }
}

fn danm_vs_full(c: &mut Criterion) {
    let mut group = c.benchmark_group("denoise");
    group.sample_size(10);
    for size in [4usize, 6, 8] {
        let f = fixture(size, size * size, 20.0).expect("fixture");
        let cfg = config(f.noise_power, f.samples.len());
        group.bench_with_input(BenchmarkId::new("decoupled", size), &f, |b, f| {
            b.iter(|| solve_danm_with(&f.operator, &f.samples, &f.geometry, &cfg).expect("solve"))
        });
        group.bench_with_input(BenchmarkId::new("full", size), &f, |b, f| {
            b.iter(|| {
                solve_full_anm(FullAnmInput::Observed { z: &f.samples, op: &f.operator }, &f.geometry, &cfg).expect("solve")
            })
        });
    }
    group.finish();
}

criterion_group!(benches, danm_vs_full);
criterion_main!(benches);
