use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lke_bench::{hamiltonian, model, prepared, truncation};
use lke_core::fermion_algebra::commutator;
use lke_core::kinetics::TrajectoryConfig;
use lke_core::{HamiltonianMode, KineticSystem, Polynomial, C64};
use std::hint::black_box;

fn generator(c: &mut Criterion) {
    let mut g = c.benchmark_group("generator_build");
    g.sample_size(10);
    for (scheme, n) in [("T2", 100), ("T4", 16), ("T4", 24), ("Tp3", 10)] {
        let m = model(n);
        let trunc = truncation(scheme, n);
        g.bench_with_input(BenchmarkId::new(scheme, n), &n, |b, _| {
            b.iter(|| KineticSystem::build(&m.coeffs, &trunc, HamiltonianMode::Full).unwrap())
        });
    }
    g.finish();
}

fn propagation(c: &mut Criterion) {
    let mut g = c.benchmark_group("propagation");
    for (scheme, n) in [("T2", 200), ("T4", 24)] {
        let p = prepared(scheme, n);
        let mut y = vec![C64::new(0.0, 0.0); p.x0.len()];
        g.bench_with_input(BenchmarkId::new(format!("matvec_{scheme}"), n), &n, |b, _| {
            b.iter(|| p.system.d.matvec(black_box(&p.x0), &mut y))
        });
        let cfg = TrajectoryConfig::new(0.1, 0.01, 10);
        g.bench_with_input(BenchmarkId::new(format!("rk4_10_steps_{scheme}"), n), &n, |b, _| {
            b.iter(|| p.system.evolve(&p.x0, &cfg, &|x| p.observables.eval(x), &p.observables.names()).unwrap())
        });
    }
    g.finish();
}

fn algebra(c: &mut Criterion) {
    let n = 12;
    let h = hamiltonian(n);
    let trunc = truncation("T4", n);
    let keys: Vec<Polynomial> = trunc.keys().iter().step_by(97).map(|k| {
            let mut p = Polynomial::new();
            p.add(*k, C64::new(1.0, 0.0));
            p
        }).collect();
    c.bench_function("commutator_with_hamiltonian_N12", |b| {
        b.iter(|| keys.iter().map(|k| commutator(k, &h).len()).sum::<usize>())
    });
}

criterion_group!(benches, generator, propagation, algebra);
criterion_main!(benches);
