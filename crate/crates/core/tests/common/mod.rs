#![allow(dead_code)]

use fgsim::decomp_channel::{ChannelSpec, ZNoise};
use fgsim::gates::Gate;
use fgsim::{CircuitProgram, Element};
use std::f64::consts::PI;

/// Four qubits, two `R_ZZ(π/3)` among matchgates, all qubits measured.
pub fn two_magic_circuit() -> CircuitProgram {
    let g = Element::Gate;
    CircuitProgram::new(
        4,
        vec![
            g(Gate::RxxNn { q: 0, theta: 0.7 }),
            g(Gate::RyyNn { q: 1, theta: 0.4 }),
            g(Gate::Rz { q: 2, theta: 0.9 }),
            g(Gate::RxxNn { q: 2, theta: 1.2 }),
            g(Gate::Rzz { q0: 0, q1: 2, theta: PI / 3.0 }),
            g(Gate::RxyNn { q: 2, theta: 1.1 }),
            g(Gate::Fswap(1)),
            g(Gate::RxxNn { q: 2, theta: 0.5 }),
            g(Gate::Rzz { q0: 1, q1: 3, theta: PI / 3.0 }),
            g(Gate::RyyNn { q: 0, theta: 0.8 }),
            g(Gate::Rz { q: 3, theta: 0.3 }),
            g(Gate::RxxNn { q: 1, theta: 1.3 }),
            Element::Measure(vec![0, 1, 2, 3]),
        ],
    )
    .unwrap()
}

/// Gaussian layers around an adaptive single-qubit-dephased `R_ZZ`.
pub fn adaptive_circuit(p: f64) -> CircuitProgram {
    let g = Element::Gate;
    CircuitProgram::new(
        4,
        vec![
            g(Gate::RxxNn { q: 0, theta: 0.9 }),
            g(Gate::RxyNn { q: 2, theta: 0.6 }),
            g(Gate::RyyNn { q: 1, theta: 1.0 }),
            Element::Channel(ChannelSpec::NoisyRzz { noise: ZNoise::Z1, theta: 0.8, p, adaptive: true, targets: [1, 2] }),
            g(Gate::RyyNn { q: 1, theta: 0.7 }),
            g(Gate::RxxNn { q: 2, theta: 0.4 }),
            Element::Measure(vec![0, 1, 2, 3]),
        ],
    )
    .unwrap()
}
