use fgsim::gates::Gate;
use fgsim::gaussian::{GaussianCircuit, GaussianState, Generator, NamedGate};
use fgsim::linalg::{max_abs_diff, C64};
use fgsim::oracle::{dense_apply_gaussian, dense_gaussian_operator, dense_projector, dense_state_from_gaussian, embed, DenseState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vacuum_dense(n: usize) -> DenseState {
    let mut s = DenseState::zero(n).unwrap();
    s.amps[0] = C64::new(1.0, 0.0);
    s
}

#[test]
fn named_gates_match_vocabulary_matrices() {
    let n = 3;
    let cases = [
        (NamedGate::Rz { q: 1, theta: 0.7 }, Gate::Rz { q: 1, theta: 0.7 }),
        (NamedGate::RxxNn { q: 0, theta: 0.3 }, Gate::RxxNn { q: 0, theta: 0.3 }),
        (NamedGate::RyyNn { q: 1, theta: -1.1 }, Gate::RyyNn { q: 1, theta: -1.1 }),
        (NamedGate::RxyNn { q: 0, theta: 2.2 }, Gate::RxyNn { q: 0, theta: 2.2 }),
        (NamedGate::X(2), Gate::X(2)),
        (NamedGate::Y(1), Gate::Y(1)),
        (NamedGate::Z(0), Gate::Z(0)),
        (NamedGate::Fswap(1), Gate::Fswap(1)),
    ];
    for (ng, g) in cases {
        let circ = GaussianCircuit::new(n).named(ng);
        let got = dense_gaussian_operator(&circ).unwrap().mat;
        let want = embed(n, &g.targets(), &g.local_matrix()).unwrap();
        assert!(max_abs_diff(&got, &want) < 1e-12, "{ng:?}");
    }
}

#[test]
fn random_circuits_track_dense_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let n = rng.gen_range(1..=7);
        let mut g = GaussianState::vacuum(n);
        let mut d = vacuum_dense(n);
        let mut states = Vec::new();
        for _ in 0..6 {
            let circ = GaussianCircuit::random(n, 25, &mut rng);
            g = g.evolve_circuit(&circ).unwrap();
            d = dense_apply_gaussian(&d, &circ).unwrap();
            let img = dense_state_from_gaussian(&g).unwrap();
            assert!(img.max_diff(&d) < 1e-8, "trial {trial}: evolution mismatch {}", img.max_diff(&d));
            let q = rng.gen_range(0..n);
            let p0 = g.measure_probability(q).unwrap();
            let dp0 = DenseState { n, amps: (dense_projector(n, q, 0) * d.to_vector()).iter().copied().collect() }.norm_sqr() / d.norm_sqr();
            assert!((p0 - dp0).abs() < 1e-9, "trial {trial}: prob {p0} vs {dp0}");
            let m = if rng.gen_bool(p0.clamp(0.05, 0.95)) { 0 } else { 1 };
            g = g.project(q, m).unwrap();
            d = DenseState { n, amps: (dense_projector(n, q, m) * d.to_vector()).iter().copied().collect() };
            let img = dense_state_from_gaussian(&g).unwrap();
            assert!(img.max_diff(&d) < 1e-8, "trial {trial}: projection mismatch");
            if d.norm_sqr() < 1e-12 {
                break;
            }
            states.push((g.clone(), d.clone()));
        }
        for (a, da) in &states {
            for (b, db) in &states {
                let o = a.overlap(b).unwrap();
                let want = da.inner(db);
                assert!((o - want).norm() < 1e-8, "trial {trial}: overlap {o} vs {want}");
            }
        }
    }
}

#[test]
fn majorana_heavy_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let mut c = GaussianCircuit::new(n);
        for _ in 0..30 {
            if rng.gen_bool(0.5) {
                c.push(Generator::Majorana(rng.gen_range(0..2 * n)));
            } else {
                let j = rng.gen_range(0..2 * n);
                let k = (j + rng.gen_range(1..2 * n)) % (2 * n);
                c.push(Generator::Rotation { j, k, theta: rng.gen_range(-3.0..3.0) });
            }
        }
        let g = GaussianState::vacuum(n).evolve_circuit(&c).unwrap();
        let d = dense_apply_gaussian(&vacuum_dense(n), &c).unwrap();
        assert!(dense_state_from_gaussian(&g).unwrap().max_diff(&d) < 1e-9);
    }
}
