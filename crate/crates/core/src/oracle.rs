//! Dense brute-force backend used as ground truth.
//!
//! Basis ordering is big-endian with qubit 0 as the most significant bit, so
//! the dense index of configuration mask `x` is `Σ_q x_q 2^{n-1-q}`.

use crate::decomp_channel::ChannelDecomposition;
use crate::error::{invalid, Error, Result};
use crate::gates::Gate;
use crate::gaussian::{majorana_on_basis, GaussianCircuit, GaussianState, Primitive};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use nalgebra::DVector;
use std::f64::consts::FRAC_1_SQRT_2;

/// Default cap on dense qubit counts.
pub const DENSE_LIMIT: usize = 14;

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::ResourceLimit { what: "dense qubits", requested: n as u128, limit: limit as u128 });
    }
    Ok(())
}

/// Dense index of a configuration mask.
pub fn dense_index(n: usize, mask: u64) -> usize {
    let mut idx = 0usize;
    for q in 0..n {
        if mask >> q & 1 == 1 {
            idx |= 1 << (n - 1 - q);
        }
    }
    idx
}

/// Configuration mask of a dense index.
pub fn mask_of_index(n: usize, idx: usize) -> u64 {
    let mut m = 0u64;
    for q in 0..n {
        if idx >> (n - 1 - q) & 1 == 1 {
            m |= 1 << q;
        }
    }
    m
}

/// A dense state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    /// Qubit count.
    pub n: usize,
    /// `2^n` amplitudes.
    pub amps: Vec<C64>,
}

impl DenseState {
    /// `|0^n>`.
    pub fn zero(n: usize) -> Result<Self> {
        check_size(n, DENSE_LIMIT)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(DenseState { n, amps })
    }

    /// State from explicit amplitudes.
    pub fn from_amps(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return invalid(format!("expected {} amplitudes, got {}", 1usize << n, amps.len()));
        }
        Ok(DenseState { n, amps })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Squared norm.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self + c * other`.
    pub fn add_scaled(&mut self, c: C64, other: &DenseState) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    /// Column vector view.
    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_vec(self.amps.clone())
    }

    /// `|ψ><ψ|`.
    pub fn projector(&self) -> CMatrix {
        let v = self.to_vector();
        &v * v.adjoint()
    }

    /// Maximum amplitude difference.
    pub fn max_diff(&self, other: &DenseState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// A dense operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    /// Qubit count.
    pub n: usize,
    /// `2^n × 2^n` matrix.
    pub mat: CMatrix,
}

/// Dense image of a Gaussian state including its amplitude.
pub fn dense_state_from_gaussian(s: &GaussianState) -> Result<DenseState> {
    let n = s.n();
    check_size(n, DENSE_LIMIT)?;
    let mut amps = vec![ZERO; 1 << n];
    if !s.is_annihilated() {
        let parity = s.parity();
        for (idx, a) in amps.iter_mut().enumerate() {
            let y = mask_of_index(n, idx);
            if y.count_ones() % 2 == parity {
                *a = s.amplitude(y);
            }
        }
    }
    Ok(DenseState { n, amps })
}

fn apply_primitive(amps: &[C64], n: usize, p: &Primitive) -> Vec<C64> {
    match *p {
        Primitive::Phase(c) => amps.iter().map(|a| a * c).collect(),
        Primitive::Majorana(a) => {
            let mut out = vec![ZERO; amps.len()];
            for (idx, &v) in amps.iter().enumerate() {
                if v == ZERO {
                    continue;
                }
                let (s, y) = majorana_on_basis(a, mask_of_index(n, idx));
                out[dense_index(n, y)] += s * v;
            }
            out
        }
        Primitive::Rotation { a, b, theta } => {
            let (s, c) = (theta / 2.0).sin_cos();
            let mut out: Vec<C64> = amps.iter().map(|v| v * c).collect();
            for (idx, &v) in amps.iter().enumerate() {
                if v == ZERO {
                    continue;
                }
                let (sb, yb) = majorana_on_basis(b, mask_of_index(n, idx));
                let (sa, ya) = majorana_on_basis(a, yb);
                out[dense_index(n, ya)] += s * sa * sb * v;
            }
            out
        }
    }
}

/// Applies a Gaussian circuit to a dense state by explicit Majorana action.
pub fn dense_apply_gaussian(state: &DenseState, circ: &GaussianCircuit) -> Result<DenseState> {
    if circ.n != state.n {
        return invalid(format!("circuit on {} qubits, state on {}", circ.n, state.n));
    }
    circ.validate()?;
    let mut amps = state.amps.clone();
    for p in circ.primitives() {
        amps = apply_primitive(&amps, state.n, &p);
    }
    Ok(DenseState { n: state.n, amps })
}

/// Dense matrix of a Gaussian circuit.
pub fn dense_gaussian_operator(circ: &GaussianCircuit) -> Result<DenseOperator> {
    let n = circ.n;
    check_size(n, 10)?;
    let dim = 1 << n;
    let mut mat = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![ZERO; dim];
        e[col] = ONE;
        let out = dense_apply_gaussian(&DenseState { n, amps: e }, circ)?;
        for (r, v) in out.amps.into_iter().enumerate() {
            mat[(r, col)] = v;
        }
    }
    Ok(DenseOperator { n, mat })
}

/// Dense Majorana operator `c_a` on `n` qubits.
pub fn dense_majorana(n: usize, a: usize) -> CMatrix {
    let mut c = GaussianCircuit::new(n);
    c.push(crate::gaussian::Generator::Majorana(a));
    dense_gaussian_operator(&c).expect("valid majorana").mat
}

/// Applies a local matrix on `targets` (first target most significant).
pub fn apply_local(state: &DenseState, targets: &[usize], m: &CMatrix) -> Result<DenseState> {
    let n = state.n;
    let k = targets.len();
    if m.nrows() != 1 << k || m.ncols() != 1 << k {
        return invalid("local matrix size does not match target count");
    }
    if targets.iter().any(|&t| t >= n) {
        return invalid(format!("target out of range for n={n}"));
    }
    let shifts: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let tmask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let mut out = vec![ZERO; state.amps.len()];
    for base in 0..state.amps.len() {
        if base & tmask != 0 {
            continue;
        }
        let idx = |local: usize| {
            let mut i = base;
            for (j, s) in shifts.iter().enumerate() {
                if local >> (k - 1 - j) & 1 == 1 {
                    i |= 1 << s;
                }
            }
            i
        };
        for r in 0..(1 << k) {
            let mut acc = ZERO;
            for c in 0..(1 << k) {
                acc += m[(r, c)] * state.amps[idx(c)];
            }
            out[idx(r)] = acc;
        }
    }
    Ok(DenseState { n, amps: out })
}

/// Applies a gate list to a dense state.
pub fn dense_apply_circuit(state: &DenseState, gates: &[Gate]) -> Result<DenseState> {
    let mut s = state.clone();
    for g in gates {
        g.validate(s.n)?;
        s = apply_local(&s, &g.targets(), &g.local_matrix())?;
    }
    Ok(s)
}

/// Full `2^n × 2^n` matrix of a local operator.
pub fn embed(n: usize, targets: &[usize], m: &CMatrix) -> Result<CMatrix> {
    let dim = 1 << n;
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![ZERO; dim];
        e[col] = ONE;
        let v = apply_local(&DenseState { n, amps: e }, targets, m)?;
        for (r, x) in v.amps.into_iter().enumerate() {
            out[(r, col)] = x;
        }
    }
    Ok(out)
}

/// Projector onto `outcome` of qubit `q` on `n` qubits.
pub fn dense_projector(n: usize, q: usize, outcome: u8) -> CMatrix {
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        if (idx >> (n - 1 - q) & 1) as u8 == outcome {
            m[(idx, idx)] = ONE;
        }
    }
    m
}

/// A channel in Kraus form `ρ -> Σ_i w_i K_i ρ K_i†`.
#[derive(Debug, Clone)]
pub struct DenseChannel {
    /// Qubit count.
    pub n: usize,
    /// Weighted Kraus operators.
    pub ops: Vec<(f64, CMatrix)>,
}

impl DenseChannel {
    /// Identity channel.
    pub fn identity(n: usize) -> Self {
        let dim = 1 << n;
        DenseChannel { n, ops: vec![(1.0, CMatrix::identity(dim, dim))] }
    }

    /// Applies the channel to a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (w, k) in &self.ops {
            out += (k * rho * k.adjoint()) * C64::new(*w, 0.0);
        }
        out
    }

    /// Same channel acting on `targets` of a larger register.
    pub fn embedded(&self, n: usize, targets: &[usize]) -> Result<DenseChannel> {
        let ops = self
            .ops
            .iter()
            .map(|(w, k)| Ok((*w, embed(n, targets, k)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseChannel { n, ops })
    }
}

/// Transfer matrix `Σ w K ⊗ K̄` of a Kraus-form channel (row-major vectorization).
pub fn transfer_matrix(ch: &DenseChannel) -> CMatrix {
    let dim = 1 << ch.n;
    let mut t = CMatrix::zeros(dim * dim, dim * dim);
    for (w, k) in &ch.ops {
        t += k.kronecker(&k.map(|z| z.conj())) * C64::new(*w, 0.0);
    }
    t
}

/// Transfer matrix of a decomposed channel (at most 3 qubits).
pub fn channel_transfer_matrix(ch: &ChannelDecomposition) -> Result<CMatrix> {
    check_size(ch.n, 3)?;
    Ok(transfer_matrix(&ch.to_dense()?))
}

/// Dual map at the identity, `T*(I)`, as a `2^n × 2^n` matrix.
pub fn dual_at_identity(t: &CMatrix, n: usize) -> CMatrix {
    let dim = 1 << n;
    CMatrix::from_fn(dim, dim, |a, b| {
        let mut s = ZERO;
        for c in 0..dim {
            s += t[(c * dim + c, a * dim + b)];
        }
        s.conj()
    })
}

/// `|ψ+>^{⊗2}` with `|ψ+> = (|00> + |11>)/√2`.
pub fn bell_pair_state() -> DenseState {
    let mut amps = vec![ZERO; 16];
    let h = C64::new(0.5, 0.0);
    for a in 0..2usize {
        for b in 0..2usize {
            amps[(a << 3) | (a << 2) | (b << 1) | b] = h;
        }
    }
    DenseState { n: 4, amps }
}

/// Single Bell pair `(|00> + |11>)/√2`.
pub fn bell_state() -> DenseState {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    DenseState { n: 2, amps: vec![h, ZERO, ZERO, h] }
}

/// Choi state with the channel on the middle qubits `1, 2` of `|ψ+>^{⊗2}`.
pub fn choi_of_dense(ch: &DenseChannel) -> Result<DenseOperator> {
    if ch.n != 2 {
        return invalid(format!("choi state needs a 2-qubit channel, got {}", ch.n));
    }
    let rho = bell_pair_state().projector();
    let full = ch.embedded(4, &[1, 2])?;
    Ok(DenseOperator { n: 4, mat: full.apply(&rho) })
}

/// Choi state of a decomposed 2-qubit channel in the middle-qubit convention.
pub fn channel_choi_state(ch: &ChannelDecomposition) -> Result<DenseOperator> {
    choi_of_dense(&ch.to_dense()?)
}

/// Permutes qubits: qubit `q` of the input becomes qubit `perm[q]` of the output.
pub fn permute_qubits(op: &DenseOperator, perm: &[usize]) -> DenseOperator {
    let n = op.n;
    let dim = 1 << n;
    let map = |idx: usize| {
        let mask = mask_of_index(n, idx);
        let mut out = 0u64;
        for (q, &p) in perm.iter().enumerate() {
            if mask >> q & 1 == 1 {
                out |= 1 << p;
            }
        }
        dense_index(n, out)
    };
    let mut mat = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            mat[(map(r), map(c))] = op.mat[(r, c)];
        }
    }
    DenseOperator { n, mat }
}

/// Converts a middle-qubit Choi state to the textbook order (references
/// first, outputs last).
pub fn choi_to_textbook(op: &DenseOperator) -> DenseOperator {
    permute_qubits(op, &[0, 2, 3, 1])
}

/// Schatten-1 distance `||a - b||_1` of Hermitian operators.
pub fn trace_distance(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    if a.mat.shape() != b.mat.shape() {
        return invalid("trace distance of operators with different dimensions");
    }
    for m in [&a.mat, &b.mat] {
        if crate::linalg::max_abs_diff(m, &m.adjoint()) > 1e-9 {
            return invalid("trace distance needs Hermitian operators");
        }
    }
    let d = &a.mat - &b.mat;
    let h = (&d + d.adjoint()) * C64::new(0.5, 0.0);
    Ok(h.symmetric_eigenvalues().iter().map(|x| x.abs()).sum())
}

/// Outcome distribution of measuring `qubits` (in order, first most
/// significant) on a density matrix.
pub fn born_distribution(rho: &CMatrix, n: usize, qubits: &[usize]) -> Vec<f64> {
    let mut p = vec![0.0; 1 << qubits.len()];
    for idx in 0..(1 << n) {
        let mut key = 0usize;
        for &q in qubits {
            key = (key << 1) | (idx >> (n - 1 - q) & 1);
        }
        p[key] += rho[(idx, idx)].re;
    }
    p
}
