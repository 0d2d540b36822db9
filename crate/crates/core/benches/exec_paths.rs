use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fgsim::decomp_unitary::{gate_decomposition, UnitaryDecomposition};
use fgsim::norm::{exact_norm, fast_norm, DEFAULT_FLOOR};
use fgsim::sparsify::sparsify_circuit;
use fgsim::{ExecPolicy, Gate, GaussianState, SparseSuperposition};

const POLICIES: [(&str, ExecPolicy); 2] = [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)];

fn circuit(n: usize) -> Vec<UnitaryDecomposition> {
    let mut gates = Vec::new();
    for layer in 0..4 {
        for q in 0..n - 1 {
            gates.push(Gate::RxxNn { q, theta: 0.3 + 0.1 * (q + layer) as f64 });
            gates.push(Gate::RyyNn { q, theta: 0.7 - 0.05 * q as f64 });
        }
        gates.push(Gate::Rzz { q0: layer, q1: layer + 3, theta: 0.9 });
        gates.push(Gate::Rzz { q0: layer + 1, q1: layer + 5, theta: 1.3 });
    }
    gates.iter().map(|g| gate_decomposition(g, n).unwrap()).collect()
}

fn superposition(n: usize, k: usize) -> SparseSuperposition {
    let decomps = circuit(n);
    sparsify_circuit(&decomps, k, 1).unwrap().evolve(&decomps, &GaussianState::vacuum(n), ExecPolicy::Parallel).unwrap()
}

fn sparsified_evolution(c: &mut Criterion) {
    let n = 10;
    let decomps = circuit(n);
    let pattern = sparsify_circuit(&decomps, 256, 1).unwrap();
    let vacuum = GaussianState::vacuum(n);
    let mut group = c.benchmark_group("sparsified_evolution");
    group.sample_size(10);
    for (name, policy) in POLICIES {
        group.bench_function(BenchmarkId::new(name, 256), |b| b.iter(|| pattern.evolve(black_box(&decomps), &vacuum, policy).unwrap()));
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let sup = superposition(10, 128);
    let mut group = c.benchmark_group("norm");
    group.sample_size(20);
    for (name, policy) in POLICIES {
        group.bench_function(BenchmarkId::new(format!("exact_{name}"), sup.states.len()), |b| b.iter(|| exact_norm(black_box(&sup), policy).unwrap()));
        group.bench_function(BenchmarkId::new(format!("fast_{name}"), sup.states.len()), |b| {
            b.iter(|| fast_norm(black_box(&sup), 0.1, 0.05, 3, DEFAULT_FLOOR, policy).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sparsified_evolution, norms);
criterion_main!(benches);
