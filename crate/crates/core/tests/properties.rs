mod common;

use fgsim::decomp_channel::*;
use fgsim::decomp_unitary::*;
use fgsim::gates::Gate;
use fgsim::gaussian::{GaussianCircuit, GaussianState};
use fgsim::linalg::{max_abs_diff, CMatrix, RMatrix, C64};
use fgsim::norm::{batch_size, exact_norm, fast_norm, DEFAULT_FLOOR};
use fgsim::oracle::*;
use fgsim::sampler::{evolve_circuit, sample_exact};
use fgsim::sparsify::*;
use fgsim::verify::*;
use fgsim::{Error, ExecPolicy, SamplerConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_state(n: usize, len: usize, seed: u64) -> GaussianState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GaussianState::vacuum(n).evolve_circuit(&GaussianCircuit::random(n, len, &mut rng)).unwrap()
}

fn purity_defect(cov: &RMatrix) -> f64 {
    let id = RMatrix::identity(cov.nrows(), cov.ncols());
    (cov * cov.transpose() - id).abs().max()
}

fn catalog() -> impl Strategy<Value = (CatalogGate, Option<f64>)> {
    prop_oneof![
        (prop::sample::select(vec![CatalogGate::Rzz, CatalogGate::Cphase, CatalogGate::Ry, CatalogGate::Rx]), -2.0 * PI..2.0 * PI).prop_map(|(g, t)| (g, Some(t))),
        prop::sample::select(vec![CatalogGate::SwapNn, CatalogGate::Hadamard]).prop_map(|g| (g, None)),
    ]
}

fn catalog_gate(g: CatalogGate, theta: Option<f64>, q: &[usize]) -> Gate {
    let t = theta.unwrap_or(0.0);
    match g {
        CatalogGate::Rzz => Gate::Rzz { q0: q[0], q1: q[1], theta: t },
        CatalogGate::Cphase => Gate::Cphase { q0: q[0], q1: q[1], theta: t },
        CatalogGate::SwapNn => Gate::Swap { q0: q[0], q1: q[1] },
        CatalogGate::Hadamard => Gate::H(q[0]),
        CatalogGate::Ry => Gate::Ry { q: q[0], theta: t },
        CatalogGate::Rx => Gate::Rx { q: q[0], theta: t },
    }
}

fn two_qubit(g: CatalogGate) -> bool {
    matches!(g, CatalogGate::Rzz | CatalogGate::Cphase | CatalogGate::SwapNn)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_preserves_purity_and_norm(n in 1usize..8, len in 1usize..60, seed in any::<u64>(), amp in 0.1f64..3.0) {
        let s = GaussianState::vacuum(n).scaled(C64::new(amp, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = s.evolve_circuit(&GaussianCircuit::random(n, len, &mut rng)).unwrap();
        prop_assert!(purity_defect(out.covariance()) <= 1e-9);
        prop_assert!((out.amp().norm() - amp).abs() <= 1e-12 * amp);
    }

    #[test]
    fn projections_split_the_norm(n in 1usize..8, seed in any::<u64>(), q in 0usize..8) {
        let q = q % n;
        let s = random_state(n, 8 * n, seed);
        let p0 = s.measure_probability(q).unwrap();
        prop_assert!((0.0..=1.0).contains(&p0));
        for (m, p) in [(0u8, p0), (1u8, 1.0 - p0)] {
            let proj = s.project(q, m).unwrap();
            prop_assert!((proj.norm_sqr() - p).abs() <= 1e-9, "outcome {} : {} vs {}", m, proj.norm_sqr(), p);
            if !proj.is_annihilated() {
                prop_assert!(purity_defect(proj.covariance()) <= 1e-9);
            }
        }
    }

    #[test]
    fn opposite_parity_states_are_orthogonal(n in 1usize..7, a in any::<u64>(), b in any::<u64>(), q in 0usize..7) {
        let s = random_state(n, 6 * n, a);
        let flipped = random_state(n, 6 * n, b).evolve_circuit(&GaussianCircuit::from_gates(n, vec![fgsim::Generator::Majorana(2 * (q % n))])).unwrap();
        if s.parity() != flipped.parity() {
            prop_assert_eq!(s.overlap(&flipped).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn catalog_reconstructs_and_matches_extent((g, theta) in catalog(), perm in 0usize..6) {
        let n = 3;
        let orders = [[0, 1], [1, 0], [0, 2], [2, 0], [1, 2], [2, 1]];
        let adjacent = [[0, 1], [1, 0], [1, 2], [2, 1]];
        let qs: Vec<usize> = match g {
            CatalogGate::SwapNn => adjacent[perm % 4].to_vec(),
            _ if two_qubit(g) => orders[perm].to_vec(),
            _ => vec![perm % 3],
        };
        let d = optimal_unitary_decomposition(g, theta, &qs, n).unwrap();
        let err = max_abs_diff(&d.dense().unwrap(), &dense_gate(&catalog_gate(g, theta, &qs), n).unwrap());
        prop_assert!(err <= 1e-10, "reconstruction error {}", err);
        prop_assert!(d.is_structurally_gaussian());
        if let Some(e) = d.extent_claim {
            prop_assert!((d.l1_squared() - e).abs() <= 1e-10);
        }
    }

    #[test]
    fn tensor_products_multiply_extent(a in -PI..PI, b in -PI..PI) {
        let n = 4;
        let d1 = optimal_unitary_decomposition(CatalogGate::Rzz, Some(a), &[0, 1], n).unwrap();
        let d2 = optimal_unitary_decomposition(CatalogGate::Rzz, Some(b), &[2, 3], n).unwrap();
        let both = d1.then(&d2).unwrap();
        prop_assert!((both.l1_squared() - d1.l1_squared() * d2.l1_squared()).abs() <= 1e-10);
        let same = d1.then(&optimal_unitary_decomposition(CatalogGate::Rzz, Some(a), &[2, 3], n).unwrap()).unwrap();
        prop_assert!((same.l1_squared() - d1.extent_claim.unwrap().powi(2)).abs() <= 1e-10);
    }

    #[test]
    fn magic_state_terms_are_orthogonal(theta in -PI..PI) {
        let (d, _) = magic_state_decomposition(theta);
        let states = d.states().unwrap();
        if states.len() == 2 {
            prop_assert!(states[0].1.overlap(&states[1].1).unwrap().norm() <= 1e-10);
        }
    }

    #[test]
    fn channels_are_trace_preserving(theta in -PI..PI, p in 0.0f64..=0.5, which in 0usize..7) {
        let n = 2;
        let spec = match which {
            0 => ChannelSpec::NoisyRot { axis: RotAxis::X, theta, p, targets: vec![1] },
            1 => ChannelSpec::NoisyRot { axis: RotAxis::Y, theta, p, targets: vec![0] },
            2 => ChannelSpec::NoisyRot { axis: RotAxis::Zz, theta, p, targets: vec![0, 1] },
            3 => ChannelSpec::NoisyRzz { noise: ZNoise::Z1, theta, p, adaptive: true, targets: [0, 1] },
            4 => ChannelSpec::NoisyRzz { noise: ZNoise::Z2, theta, p, adaptive: true, targets: [1, 0] },
            5 => ChannelSpec::NoisyRzz { noise: ZNoise::General, theta, p, adaptive: true, targets: [0, 1] },
            _ => ChannelSpec::NoisyRzz { noise: ZNoise::Z1, theta, p, adaptive: false, targets: [0, 1] },
        };
        let d = spec.decompose(n).unwrap();
        let t = channel_transfer_matrix(&d).unwrap();
        prop_assert!(max_abs_diff(&dual_at_identity(&t, n), &CMatrix::identity(4, 4)) <= 1e-10);
        prop_assert!(max_abs_diff(&t, &transfer_matrix(&spec.defining_channel(n).unwrap())) <= 1e-10);
        for b in &d.branches {
            if let Branch::Adaptive(a) = b {
                prop_assert!(a.completeness_defect(n).unwrap() <= 1e-10);
            }
        }
        if d.equimagical {
            let norms: Vec<f64> = d.branches.iter().filter_map(|b| if let Branch::Unitary { decomp, .. } = b { Some(decomp.l1_norm) } else { None }).collect();
            prop_assert!(norms.iter().all(|c| (c - norms[0]).abs() <= 1e-12));
        }
    }

    #[test]
    fn sandwich_never_inverts(theta in 0.01f64..(2.0 * PI - 0.01), p in 0.0f64..=0.5) {
        let spec = ChannelSpec::NoisyRot { axis: RotAxis::Zz, theta, p, targets: vec![0, 1] };
        let input = bell_pair_input().unwrap();
        let ws = standard_witnesses(2).unwrap();
        let optimal = sandwich_bounds(&spec.decompose(2).unwrap(), &input, &[1, 2], &ws).unwrap();
        prop_assert!(optimal.consistent);
        prop_assert!((optimal.lower - optimal.upper).abs() <= 1e-9);
        let naive = naive_noisy_rotation(&PauliAxis::Zz(0, 1), theta, p, 2).unwrap();
        let r = sandwich_bounds(&naive, &input, &[1, 2], &ws).unwrap();
        prop_assert!(r.consistent);
        if p > 1e-3 && theta.sin().abs() > 1e-2 {
            prop_assert!(r.lower < r.upper - 1e-9);
        }
    }

    #[test]
    fn sparsified_terms_share_one_magnitude(theta in -PI..PI, k in 1usize..50, seed in any::<u64>()) {
        let (d, _) = magic_state_decomposition(theta);
        let pairs = d.states().unwrap();
        let l1: f64 = pairs.iter().map(|p| p.0.norm()).sum();
        let sup = sparsify_state(&pairs, k, seed).unwrap();
        prop_assert_eq!(sup.k(), k);
        for (c, _) in &sup.terms {
            prop_assert!((c.norm() - l1 / k as f64).abs() <= 1e-12);
        }
        prop_assert!((sup.l1_norm() - l1).abs() <= 1e-12);
    }

    #[test]
    fn adaptive_pattern_is_shared_by_all_trajectories(k in 1usize..40, seed in any::<u64>()) {
        let d = ChannelSpec::NoisyRzz { noise: ZNoise::Z1, theta: 0.8, p: 0.3, adaptive: true, targets: [1, 2] }.decompose(4).unwrap();
        let branch = d.branches.iter().find_map(|b| if let Branch::Adaptive(a) = b { Some(a.clone()) } else { None }).unwrap();
        let u = |g: Gate| AdaptiveElement::Unitary(gate_decomposition(&g, 4).unwrap());
        let elements = vec![u(Gate::Rzz { q0: 0, q1: 3, theta: 0.4 }), AdaptiveElement::Kraus(branch), u(Gate::Rzz { q0: 1, q1: 2, theta: 1.0 })];
        let pat = sparsify_adaptive(&elements, k, seed).unwrap();
        prop_assert_eq!(&pat.skeleton, &vec![Some(0), None, Some(1)]);
        let vac = GaussianState::vacuum(4);
        let a = pat.apply(&elements, &vac, &[0], ExecPolicy::Sequential).unwrap();
        let b = pat.apply(&elements, &vac, &[1], ExecPolicy::Sequential).unwrap();
        prop_assert_eq!(a.terms, b.terms);
    }

    #[test]
    fn fast_norm_is_deterministic(seed in any::<u64>(), k in 2usize..30) {
        let decomps = vec![
            gate_decomposition(&Gate::Rzz { q0: 0, q1: 2, theta: 0.9 }, 3).unwrap(),
            gate_decomposition(&Gate::RxxNn { q: 0, theta: 0.4 }, 3).unwrap(),
            gate_decomposition(&Gate::H(1), 3).unwrap(),
        ];
        let sup = sparsify_circuit(&decomps, k, seed).unwrap().evolve(&decomps, &GaussianState::vacuum(3), ExecPolicy::Sequential).unwrap();
        let a = fast_norm(&sup, 0.1, 0.05, seed, DEFAULT_FLOOR, ExecPolicy::Sequential).unwrap();
        let b = fast_norm(&sup, 0.1, 0.05, seed, DEFAULT_FLOOR, ExecPolicy::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn batch_size_grows_as_inverse_square(v in 0.01f64..100.0, eps in 0.001f64..0.5, floor in 0.01f64..1.0) {
        let b1 = batch_size(v, eps, floor);
        let b2 = batch_size(v, eps / 2.0, floor);
        prop_assert!(b2 >= b1);
        let ratio = b2 as f64 / b1 as f64;
        prop_assert!(b1 < 100 || (ratio - 4.0).abs() <= 0.1, "ratio {}", ratio);
    }
}

#[test]
fn sparsified_state_is_unbiased() {
    let (d, _) = magic_state_decomposition(0.9);
    let pairs = d.states().unwrap();
    let exact = d.dense().unwrap();
    let seeds = 4000;
    let dim = exact.amps.len();
    let mut mean = vec![C64::new(0.0, 0.0); dim];
    let mut sq = vec![0.0; dim];
    for s in 0..seeds {
        let v = sparsify_state(&pairs, 3, s).unwrap().dense().unwrap();
        for (i, a) in v.amps.iter().enumerate() {
            mean[i] += a;
            sq[i] += a.norm_sqr();
        }
    }
    for i in 0..dim {
        let m = mean[i] / seeds as f64;
        let var = sq[i] / seeds as f64 - m.norm_sqr();
        let sigma = (var / seeds as f64).sqrt();
        assert!((m - exact.amps[i]).norm() <= 4.0 * sigma + 1e-12, "component {i}: {m} vs {}", exact.amps[i]);
    }
}

#[test]
fn single_batch_estimates_are_unbiased() {
    let decomps = vec![gate_decomposition(&Gate::Rzz { q0: 0, q1: 1, theta: 1.2 }, 3).unwrap(), gate_decomposition(&Gate::Cphase { q0: 1, q1: 2, theta: 2.0 }, 3).unwrap()];
    let sup = sparsify_circuit(&decomps, 12, 5).unwrap().evolve(&decomps, &GaussianState::vacuum(3), ExecPolicy::Sequential).unwrap();
    let exact = exact_norm(&sup, ExecPolicy::Sequential).unwrap();
    let runs: Vec<f64> = (0..400).map(|s| fast_norm(&sup, 0.3, 0.9, s, DEFAULT_FLOOR, ExecPolicy::Sequential).unwrap().value).collect();
    let mean = runs.iter().sum::<f64>() / runs.len() as f64;
    let var = runs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (runs.len() - 1) as f64;
    assert!((mean - exact).abs() <= 3.0 * (var / runs.len() as f64).sqrt(), "{mean} vs {exact}");
}

#[test]
fn exact_sampler_chains_conditional_probabilities() {
    let c = common::two_magic_circuit();
    let want = c.dense_distribution(&c.measured()).unwrap();
    let run = sample_exact(&c, &SamplerConfig { shots: 300, seed: 77, ..Default::default() }).unwrap();
    let cost = (1.0 + (PI / 3.0).sin()).powi(2);
    for r in &run.reports {
        assert!(r.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
        let joint: f64 = r.probabilities.iter().product();
        let idx = r.bits.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
        assert!((joint - want[idx]).abs() <= 1e-9, "{joint} vs {}", want[idx]);
        assert!((r.cost - cost).abs() <= 1e-12);
    }
}

#[test]
fn rank_budget_refuses_before_expanding() {
    let decomps: Vec<_> = (0..3).map(|i| gate_decomposition(&Gate::Rzz { q0: i, q1: i + 1, theta: 0.5 }, 4).unwrap()).collect();
    let vac = GaussianState::vacuum(4);
    assert!(matches!(evolve_circuit(&decomps, &vac, 7, ExecPolicy::Sequential), Err(Error::ResourceLimit { requested: 8, limit: 7, .. })));
    assert_eq!(evolve_circuit(&decomps, &vac, 8, ExecPolicy::Sequential).unwrap().k(), 8);
}

#[test]
fn plus_state_fidelity_anchor() {
    for t in 2..=5 {
        let (analytic, sampled) = plus_state_fidelity(t, 2000, t as u64, ExecPolicy::Parallel).unwrap();
        assert!((analytic - 0.5).abs() <= 1e-12);
        assert!(sampled <= 0.5 + 1e-9, "t={t}: {sampled}");
    }
}
