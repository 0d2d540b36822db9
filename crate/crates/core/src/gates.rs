//! Closed gate vocabulary shared by the dense oracle, the decomposition
//! catalog and the circuit front end.

use crate::error::{invalid, Result};
use crate::gaussian::{Generator, NamedGate};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};
use std::f64::consts::FRAC_1_SQRT_2;

/// A gate with its targets. Two-qubit matrices use the basis `|t0 t1>` with
/// the first target as the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(-iθZ/2)`.
    Rz { q: usize, theta: f64 },
    /// `exp(-iθX/2)`.
    Rx { q: usize, theta: f64 },
    /// `exp(-iθY/2)`.
    Ry { q: usize, theta: f64 },
    /// Hadamard.
    H(usize),
    /// Pauli X.
    X(usize),
    /// Pauli Y.
    Y(usize),
    /// Pauli Z.
    Z(usize),
    /// `exp(-iθ XX/2)` on `(q, q+1)`.
    RxxNn { q: usize, theta: f64 },
    /// `exp(-iθ YY/2)` on `(q, q+1)`.
    RyyNn { q: usize, theta: f64 },
    /// `exp(-iθ X_q Y_{q+1}/2)`.
    RxyNn { q: usize, theta: f64 },
    /// Fermionic swap of `(q, q+1)`.
    Fswap(usize),
    /// `exp(-iθ ZZ/2)` on any pair.
    Rzz { q0: usize, q1: usize, theta: f64 },
    /// `diag(1, 1, 1, e^{iθ})` on any pair.
    Cphase { q0: usize, q1: usize, theta: f64 },
    /// Qubit swap on any pair.
    Swap { q0: usize, q1: usize },
    /// Arbitrary 4×4 unitary in row-major order.
    CustomU4 { q0: usize, q1: usize, matrix: Box<[C64; 16]> },
}

impl Gate {
    /// Vocabulary identifier.
    pub fn id(&self) -> &'static str {
        match self {
            Gate::Rz { .. } => "rz",
            Gate::Rx { .. } => "rx",
            Gate::Ry { .. } => "ry",
            Gate::H(_) => "h",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::RxxNn { .. } => "rxx_nn",
            Gate::RyyNn { .. } => "ryy_nn",
            Gate::RxyNn { .. } => "rxy_nn",
            Gate::Fswap(_) => "fswap",
            Gate::Rzz { .. } => "rzz",
            Gate::Cphase { .. } => "cphase",
            Gate::Swap { .. } => "swap",
            Gate::CustomU4 { .. } => "custom_u4",
        }
    }

    /// Rotation angle, if the gate has one.
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Gate::Rz { theta, .. }
            | Gate::Rx { theta, .. }
            | Gate::Ry { theta, .. }
            | Gate::RxxNn { theta, .. }
            | Gate::RyyNn { theta, .. }
            | Gate::RxyNn { theta, .. }
            | Gate::Rzz { theta, .. }
            | Gate::Cphase { theta, .. } => Some(theta),
            _ => None,
        }
    }

    /// Target qubits in matrix order.
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::Rz { q, .. } | Gate::Rx { q, .. } | Gate::Ry { q, .. } => vec![q],
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![q],
            Gate::RxxNn { q, .. } | Gate::RyyNn { q, .. } | Gate::RxyNn { q, .. } | Gate::Fswap(q) => {
                vec![q, q + 1]
            }
            Gate::Rzz { q0, q1, .. } | Gate::Cphase { q0, q1, .. } | Gate::Swap { q0, q1 } => vec![q0, q1],
            Gate::CustomU4 { q0, q1, .. } => vec![q0, q1],
        }
    }

    /// Checks targets against `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        let t = self.targets();
        if let Some(&bad) = t.iter().find(|&&q| q >= n) {
            return invalid(format!("{}: target {bad} out of range for n={n}", self.id()));
        }
        if t.len() == 2 && t[0] == t[1] {
            return invalid(format!("{}: targets must differ", self.id()));
        }
        if let Gate::CustomU4 { .. } = self {
            let u = self.local_matrix();
            let d = crate::linalg::max_abs_diff(&(u.adjoint() * &u), &crate::linalg::eye(4));
            if d > 1e-8 {
                return invalid(format!("custom_u4 is not unitary (defect {d:.3e})"));
            }
        }
        Ok(())
    }

    /// Matrix on the targets.
    pub fn local_matrix(&self) -> CMatrix {
        let c = |re: f64| C64::new(re, 0.0);
        match self {
            Gate::Rz { theta, .. } => {
                let h = theta / 2.0;
                CMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, -h), ZERO, ZERO, C64::from_polar(1.0, h)])
            }
            Gate::Rx { theta, .. } => {
                let (s, co) = (theta / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c(co), -I * s, -I * s, c(co)])
            }
            Gate::Ry { theta, .. } => {
                let (s, co) = (theta / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
            }
            Gate::H(_) => {
                let h = c(FRAC_1_SQRT_2);
                CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            Gate::X(_) => pauli_x(),
            Gate::Y(_) => pauli_y(),
            Gate::Z(_) => pauli_z(),
            Gate::RxxNn { theta, .. } => pauli_rotation(&pauli_x().kronecker(&pauli_x()), *theta),
            Gate::RyyNn { theta, .. } => pauli_rotation(&pauli_y().kronecker(&pauli_y()), *theta),
            Gate::RxyNn { theta, .. } => pauli_rotation(&pauli_x().kronecker(&pauli_y()), *theta),
            Gate::Rzz { theta, .. } => pauli_rotation(&pauli_z().kronecker(&pauli_z()), *theta),
            Gate::Fswap(_) => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(1, 2)] = ONE;
                m[(2, 1)] = ONE;
                m[(3, 3)] = -ONE;
                m
            }
            Gate::Swap { .. } => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(1, 2)] = ONE;
                m[(2, 1)] = ONE;
                m[(3, 3)] = ONE;
                m
            }
            Gate::Cphase { theta, .. } => {
                let mut m = CMatrix::identity(4, 4);
                m[(3, 3)] = C64::from_polar(1.0, *theta);
                m
            }
            Gate::CustomU4 { matrix, .. } => CMatrix::from_row_slice(4, 4, &matrix[..]),
        }
    }

    /// Generator list for gates that are Gaussian as given, else `None`.
    pub fn gaussian_generators(&self) -> Option<Vec<Generator>> {
        let named = |g| Some(vec![Generator::Named(g)]);
        match *self {
            Gate::Rz { q, theta } => named(NamedGate::Rz { q, theta }),
            Gate::X(q) => named(NamedGate::X(q)),
            Gate::Y(q) => named(NamedGate::Y(q)),
            Gate::Z(q) => named(NamedGate::Z(q)),
            Gate::RxxNn { q, theta } => named(NamedGate::RxxNn { q, theta }),
            Gate::RyyNn { q, theta } => named(NamedGate::RyyNn { q, theta }),
            Gate::RxyNn { q, theta } => named(NamedGate::RxyNn { q, theta }),
            Gate::Fswap(q) => named(NamedGate::Fswap(q)),
            _ => None,
        }
    }

    /// `true` if the gate is a Gaussian unitary as given.
    pub fn is_gaussian(&self) -> bool {
        self.gaussian_generators().is_some()
    }
}

/// Pauli X.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// Pauli Y.
pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

/// Pauli Z.
pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `exp(-iθP/2)` for an involutory `P`.
pub fn pauli_rotation(p: &CMatrix, theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::identity(p.nrows(), p.ncols()) * C64::new(c, 0.0) - p * (I * s)
}
