use criterion::{criterion_group, criterion_main, Criterion};
use qbench_bench::workloads;
use qbench_core::{builtin_machine, measure_distribution, run_noisy, transpile};

fn ideal(c: &mut Criterion) {
    let mut group = c.benchmark_group("ideal");
    for alg in workloads() {
        let circuit = alg.build().unwrap();
        group.bench_function(alg.name(), |b| b.iter(|| measure_distribution(&circuit).unwrap()));
    }
    group.finish();
}

fn noisy(c: &mut Criterion) {
    let arch = builtin_machine("casablanca").unwrap();
    let mut group = c.benchmark_group("noisy_casablanca");
    group.sample_size(20);
    for alg in workloads() {
        let circuit = alg.build().unwrap();
        group.bench_function(alg.name(), |b| b.iter(|| run_noisy(&circuit, &arch, None).unwrap()));
    }
    group.finish();
}

fn routing(c: &mut Criterion) {
    let arch = builtin_machine("bogota").unwrap();
    let mut group = c.benchmark_group("transpile_bogota");
    for alg in workloads().into_iter().filter(|a| a.expected_workspace() <= arch.num_qubits) {
        let circuit = alg.build().unwrap();
        group.bench_function(alg.name(), |b| b.iter(|| transpile(&circuit, &arch, None).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, ideal, noisy, routing);
criterion_main!(benches);
