use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qregime::markov::{build_chain_circuit, mse_experiment, ChainSpec, TransitionMatrix};
use qregime::sim::statevector_with;
use qregime::Execution;
use std::hint::black_box;

const TM: TransitionMatrix = TransitionMatrix {
    p_gb: 0.3,
    p_bg: 0.4,
};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn gate_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("statevector");
    g.sample_size(10);
    for t in [12usize, 17] {
        let circuit = build_chain_circuit(&TM, t, true).unwrap();
        for (name, exec) in modes() {
            g.bench_with_input(BenchmarkId::new(name, t + 1), &circuit, |b, circ| {
                b.iter(|| black_box(statevector_with(circ, exec).unwrap()))
            });
        }
    }
    g.finish();
}

fn mc_iterations(c: &mut Criterion) {
    let mut g = c.benchmark_group("mse_iterations");
    g.sample_size(10);
    let chain = ChainSpec::homogeneous(&TM, 6).unwrap();
    for (name, exec) in modes() {
        g.bench_function(name, |b| {
            b.iter(|| black_box(mse_experiment(&chain, 1028, 64, 7, true, exec).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, gate_kernels, mc_iterations);
criterion_main!(benches);
