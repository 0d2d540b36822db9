//! Decompositions of noisy rotation channels into mixtures of decomposed
//! unitaries and measure-and-feed-forward Gaussian branches, plus the
//! decomposition oracle that samples channel branches.

use crate::decomp_unitary::{optimal_unitary_decomposition, CatalogGate, UnitaryDecomposition};
use crate::error::{invalid, Error, Result};
use crate::gates::{pauli_rotation, pauli_x, pauli_y, pauli_z, Gate};
use crate::gaussian::{GaussianCircuit, Generator, NamedGate};
use crate::linalg::{CMatrix, C64, I};
use crate::oracle::{dense_gaussian_operator, dense_projector, embed, DenseChannel};
use crate::rng::keyed;
use rand::Rng;
use std::f64::consts::PI;

/// A single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    /// Pauli X.
    X,
    /// Pauli Y.
    Y,
    /// Pauli Z.
    Z,
}

impl Pauli {
    fn gate(self, q: usize) -> NamedGate {
        match self {
            Pauli::X => NamedGate::X(q),
            Pauli::Y => NamedGate::Y(q),
            Pauli::Z => NamedGate::Z(q),
        }
    }

    fn matrix(self) -> CMatrix {
        match self {
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// Rotation axis of a noisy Pauli rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PauliAxis {
    /// `X_q`.
    X(usize),
    /// `Y_q`.
    Y(usize),
    /// `Z_a Z_b`.
    Zz(usize, usize),
    /// Arbitrary Pauli string on distinct qubits.
    String(Vec<(usize, Pauli)>),
}

impl PauliAxis {
    /// Factors of the Pauli string.
    pub fn factors(&self) -> Vec<(usize, Pauli)> {
        match self {
            PauliAxis::X(q) => vec![(*q, Pauli::X)],
            PauliAxis::Y(q) => vec![(*q, Pauli::Y)],
            PauliAxis::Zz(a, b) => vec![(*a, Pauli::Z), (*b, Pauli::Z)],
            PauliAxis::String(f) => f.clone(),
        }
    }

    /// Gaussian circuit applying the Pauli string exactly.
    pub fn circuit(&self, n: usize) -> GaussianCircuit {
        GaussianCircuit::from_gates(n, self.factors().into_iter().map(|(q, p)| Generator::Named(p.gate(q))).collect())
    }

    /// Qubits the string acts on.
    pub fn support(&self) -> Vec<usize> {
        self.factors().into_iter().map(|(q, _)| q).collect()
    }

    /// Dense Pauli string on `n` qubits.
    pub fn dense(&self, n: usize) -> Result<CMatrix> {
        let mut m = CMatrix::identity(1 << n, 1 << n);
        for (q, p) in self.factors() {
            m = embed(n, &[q], &p.matrix())? * m;
        }
        Ok(m)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let s = self.support();
        if s.is_empty() {
            return invalid("empty Pauli axis");
        }
        for (i, q) in s.iter().enumerate() {
            if *q >= n {
                return invalid(format!("axis qubit {q} out of range for n={n}"));
            }
            if s[..i].contains(q) {
                return invalid("axis qubits must be distinct");
            }
        }
        Ok(())
    }

    fn extent_optimal(&self) -> bool {
        match self {
            PauliAxis::Y(_) => true,
            PauliAxis::Zz(a, b) => a.abs_diff(*b) == 1,
            _ => false,
        }
    }
}

/// Two-term decomposition `cos(θ/2) I − i sin(θ/2) P` of `R_P(θ)`.
pub fn pauli_rotation_decomposition(axis: &PauliAxis, theta: f64, n: usize) -> Result<UnitaryDecomposition> {
    axis.validate(n)?;
    match axis {
        PauliAxis::Y(q) => optimal_unitary_decomposition(CatalogGate::Ry, Some(theta), &[*q], n),
        PauliAxis::X(q) => optimal_unitary_decomposition(CatalogGate::Rx, Some(theta), &[*q], n),
        PauliAxis::Zz(a, b) => optimal_unitary_decomposition(CatalogGate::Rzz, Some(theta), &[*a, *b], n),
        PauliAxis::String(_) => {
            let (s, c) = (theta / 2.0).sin_cos();
            Ok(UnitaryDecomposition::new(
                n,
                vec![(C64::new(c, 0.0), GaussianCircuit::new(n)), (-I * s, axis.circuit(n))],
                Some(1.0 + theta.sin().abs()),
                false,
                axis.support(),
            ))
        }
    }
}

/// One Kraus operator of an adaptive branch: project `qubit` onto `outcome`,
/// then apply `then`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOp {
    /// Measured qubit.
    pub qubit: usize,
    /// Projected outcome.
    pub outcome: u8,
    /// Gaussian circuit applied after the projection.
    pub then: GaussianCircuit,
}

/// A convex-Gaussian measure-and-feed-forward channel with its mixture weight.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveBranch {
    /// Kraus operators.
    pub kraus: Vec<KrausOp>,
    /// Mixture weight.
    pub weight: f64,
}

impl AdaptiveBranch {
    /// `max |Σ K†K − I|` on the dense oracle.
    pub fn completeness_defect(&self, n: usize) -> Result<f64> {
        let dim = 1 << n;
        let mut s = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            let m = kraus_matrix(k, n)?;
            s += m.adjoint() * m;
        }
        Ok(crate::linalg::max_abs_diff(&s, &CMatrix::identity(dim, dim)))
    }
}

fn kraus_matrix(k: &KrausOp, n: usize) -> Result<CMatrix> {
    Ok(dense_gaussian_operator(&k.then)?.mat * dense_projector(n, k.qubit, k.outcome))
}

/// A branch of a channel decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    /// A decomposed unitary applied with probability `prob`.
    Unitary { prob: f64, decomp: UnitaryDecomposition },
    /// An adaptive Gaussian channel.
    Adaptive(AdaptiveBranch),
}

impl Branch {
    /// Mixture probability.
    pub fn probability(&self) -> f64 {
        match self {
            Branch::Unitary { prob, .. } => *prob,
            Branch::Adaptive(a) => a.weight,
        }
    }

    /// Cost contribution: `prob · ‖c‖₁²` or the adaptive weight.
    pub fn cost(&self) -> f64 {
        match self {
            Branch::Unitary { prob, decomp } => prob * decomp.l1_squared(),
            Branch::Adaptive(a) => a.weight,
        }
    }
}

/// Strength of the optimality statement attached to a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalFlag {
    /// Proven to attain the channel extent.
    ExtentOptimal,
    /// Feasible for the augmented channel extent.
    AugmentedFeasible,
    /// Feasible only.
    Feasible,
}

/// A channel as a convex mixture of branches.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDecomposition {
    /// Qubit count of every branch.
    pub n: usize,
    /// Branches.
    pub branches: Vec<Branch>,
    /// `Σ prob·‖c‖₁² + Σ adaptive weight`.
    pub cost: f64,
    /// `true` when all unitary branches share the same `‖c‖₁`.
    pub equimagical: bool,
    /// Optimality statement.
    pub optimal_flag: OptimalFlag,
}

impl ChannelDecomposition {
    /// Builds a decomposition, dropping zero-probability branches.
    pub fn new(n: usize, branches: Vec<Branch>, optimal_flag: OptimalFlag) -> Result<Self> {
        let branches: Vec<Branch> = branches.into_iter().filter(|b| b.probability() > 1e-15).collect();
        let total: f64 = branches.iter().map(Branch::probability).sum();
        if (total - 1.0).abs() > 1e-12 || branches.iter().any(|b| b.probability() < 0.0) {
            return invalid(format!("branch probabilities sum to {total}"));
        }
        let cost = branches.iter().map(Branch::cost).sum();
        let norms: Vec<f64> = branches
            .iter()
            .filter_map(|b| if let Branch::Unitary { decomp, .. } = b { Some(decomp.l1_norm) } else { None })
            .collect();
        let equimagical = norms.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12);
        Ok(ChannelDecomposition { n, branches, cost, equimagical, optimal_flag })
    }

    /// Single unitary branch.
    pub fn unitary(decomp: UnitaryDecomposition) -> Self {
        let optimal_flag = if decomp.optimal { OptimalFlag::ExtentOptimal } else { OptimalFlag::Feasible };
        Self::new(decomp.n, vec![Branch::Unitary { prob: 1.0, decomp }], optimal_flag).expect("unit probability")
    }

    /// `true` if any branch is adaptive.
    pub fn has_adaptive(&self) -> bool {
        self.branches.iter().any(|b| matches!(b, Branch::Adaptive(_)))
    }

    /// Dense Kraus form (at most 10 qubits).
    pub fn to_dense(&self) -> Result<DenseChannel> {
        if self.n > 10 {
            return Err(Error::ResourceLimit { what: "dense channel qubits", requested: self.n as u128, limit: 10 });
        }
        let mut ops = Vec::new();
        for b in &self.branches {
            match b {
                Branch::Unitary { prob, decomp } => ops.push((*prob, decomp.dense()?)),
                Branch::Adaptive(a) => {
                    for k in &a.kraus {
                        ops.push((a.weight, kraus_matrix(k, self.n)?));
                    }
                }
            }
        }
        Ok(DenseChannel { n: self.n, ops })
    }

    /// Draws a branch index with the declared probabilities from a uniform `u ∈ [0,1)`.
    pub fn pick(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, b) in self.branches.iter().enumerate() {
            acc += b.probability();
            if u < acc {
                return i;
            }
        }
        self.branches.len() - 1
    }

    /// Combines decompositions as the mixture `Σ w_i D_i`.
    pub fn mixture(parts: &[(f64, ChannelDecomposition)], optimal_flag: OptimalFlag) -> Result<Self> {
        let n = parts.first().map(|p| p.1.n).ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut branches = Vec::new();
        for (w, d) in parts {
            if d.n != n {
                return invalid("mixture parts on different qubit counts");
            }
            for b in &d.branches {
                branches.push(match b {
                    Branch::Unitary { prob, decomp } => Branch::Unitary { prob: w * prob, decomp: decomp.clone() },
                    Branch::Adaptive(a) => Branch::Adaptive(AdaptiveBranch { kraus: a.kraus.clone(), weight: w * a.weight }),
                });
            }
        }
        Self::new(n, branches, optimal_flag)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return invalid(format!("noise probability {p} outside [0, 1/2]"));
    }
    Ok(())
}

/// `φ = arcsin((1−2p) sinθ)` and `s = (1 + (1−2p) cosθ / cosφ)/2`.
pub fn equimagical_parameters(theta: f64, p: f64) -> (f64, f64) {
    let phi = ((1.0 - 2.0 * p) * theta.sin()).clamp(-1.0, 1.0).asin();
    let cphi = phi.cos();
    let s = if cphi.abs() < 1e-12 { 1.0 } else { 0.5 * (1.0 + (1.0 - 2.0 * p) * theta.cos() / cphi) };
    (phi, s.clamp(0.0, 1.0))
}

/// Equimagical decomposition `s R_P(φ) + (1−s) R_P(π−φ)` of the noisy rotation
/// `(1−p) R_P(θ) + p P∘R_P(θ)`.
pub fn equimagical_noisy_rotation(axis: &PauliAxis, theta: f64, p: f64, n: usize) -> Result<ChannelDecomposition> {
    check_p(p)?;
    let (phi, s) = equimagical_parameters(theta, p);
    let flag = if axis.extent_optimal() { OptimalFlag::ExtentOptimal } else { OptimalFlag::Feasible };
    ChannelDecomposition::new(
        n,
        vec![
            Branch::Unitary { prob: s, decomp: pauli_rotation_decomposition(axis, phi, n)? },
            Branch::Unitary { prob: 1.0 - s, decomp: pauli_rotation_decomposition(axis, PI - phi, n)? },
        ],
        flag,
    )
}

/// The defining mixture `(1−p) R_P(θ) + p P∘R_P(θ)` with both branches decomposed.
pub fn naive_noisy_rotation(axis: &PauliAxis, theta: f64, p: f64, n: usize) -> Result<ChannelDecomposition> {
    check_p(p)?;
    let rot = pauli_rotation_decomposition(axis, theta, n)?;
    let flipped = rot.then(&UnitaryDecomposition::gaussian(axis.circuit(n), axis.support()))?;
    ChannelDecomposition::new(
        n,
        vec![Branch::Unitary { prob: 1.0 - p, decomp: rot }, Branch::Unitary { prob: p, decomp: flipped }],
        OptimalFlag::Feasible,
    )
}

/// Which qubit of a `ZZ` rotation carries single-qubit `Z` noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoisyQubit {
    /// The first target.
    First,
    /// The second target.
    Second,
}

/// `(1−p) R_ZZ(θ) + p Z_i∘R_ZZ(θ)` as `(1−2p) R_ZZ(θ) + 2p E`, where `E`
/// measures the noisy qubit and rotates the other by `±θ`.
pub fn adaptive_nzz_single_z(theta: f64, p: f64, noisy: NoisyQubit, targets: [usize; 2], n: usize) -> Result<ChannelDecomposition> {
    check_p(p)?;
    let rzz = optimal_unitary_decomposition(CatalogGate::Rzz, Some(theta), &targets, n)?;
    let (measured, other) = match noisy {
        NoisyQubit::First => (targets[0], targets[1]),
        NoisyQubit::Second => (targets[1], targets[0]),
    };
    let rz = |t: f64| GaussianCircuit::new(n).named(NamedGate::Rz { q: other, theta: t });
    let adaptive = AdaptiveBranch {
        kraus: vec![
            KrausOp { qubit: measured, outcome: 0, then: rz(theta) },
            KrausOp { qubit: measured, outcome: 1, then: rz(-theta) },
        ],
        weight: 2.0 * p,
    };
    ChannelDecomposition::new(
        n,
        vec![Branch::Unitary { prob: 1.0 - 2.0 * p, decomp: rzz }, Branch::Adaptive(adaptive)],
        OptimalFlag::AugmentedFeasible,
    )
}

/// `R_ZZ(θ)` followed by `(1−p) I + p/3 (Z_1 + Z_2 + Z_1 Z_2)`, as the equal
/// mixture of the three single-source noise channels of strength `p`.
pub fn general_dephasing_decomposition(theta: f64, p: f64, allow_adaptive: bool, targets: [usize; 2], n: usize) -> Result<ChannelDecomposition> {
    check_p(p)?;
    let [a, b] = targets;
    let zz = equimagical_noisy_rotation(&PauliAxis::Zz(a, b), theta, p, n)?;
    let (z1, z2) = if allow_adaptive {
        (
            adaptive_nzz_single_z(theta, p, NoisyQubit::First, targets, n)?,
            adaptive_nzz_single_z(theta, p, NoisyQubit::Second, targets, n)?,
        )
    } else {
        (single_z_noise_naive(theta, p, a, targets, n)?, single_z_noise_naive(theta, p, b, targets, n)?)
    };
    let third = 1.0 / 3.0;
    let flag = if allow_adaptive { OptimalFlag::AugmentedFeasible } else { OptimalFlag::Feasible };
    ChannelDecomposition::mixture(&[(third, z1), (third, z2), (third, zz)], flag)
}

/// `(1−p) R_ZZ(θ) + p Z_q∘R_ZZ(θ)` with both branches decomposed.
pub fn single_z_noise_naive(theta: f64, p: f64, noisy: usize, targets: [usize; 2], n: usize) -> Result<ChannelDecomposition> {
    check_p(p)?;
    if !targets.contains(&noisy) {
        return invalid("noisy qubit must be one of the targets");
    }
    let rzz = optimal_unitary_decomposition(CatalogGate::Rzz, Some(theta), &targets, n)?;
    let z = UnitaryDecomposition::gaussian(GaussianCircuit::new(n).named(NamedGate::Z(noisy)), vec![noisy]);
    let flipped = rzz.then(&z)?;
    ChannelDecomposition::new(
        n,
        vec![Branch::Unitary { prob: 1.0 - p, decomp: rzz }, Branch::Unitary { prob: p, decomp: flipped }],
        OptimalFlag::Feasible,
    )
}

/// Quasiprobability decomposition `Σ_{jk} q_jk L_j(·)R_k†` of the unitary channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FnlDecomposition {
    /// `(q_jk, j, k)` with `q_jk = c_j c̄_k` indexing the unitary's terms.
    pub terms: Vec<(C64, usize, usize)>,
    /// `Σ |q_jk|`.
    pub l1: f64,
}

/// Dyadic expansion `U(·)U† = Σ c_j c̄_k K_j(·)K_k†`; `l1 = ‖c‖₁²`.
pub fn fnl_decomposition(u: &UnitaryDecomposition) -> Result<FnlDecomposition> {
    if u.terms.is_empty() {
        return invalid("empty unitary decomposition");
    }
    let mut terms = Vec::with_capacity(u.rank() * u.rank());
    for (j, (cj, _)) in u.terms.iter().enumerate() {
        for (k, (ck, _)) in u.terms.iter().enumerate() {
            terms.push((cj * ck.conj(), j, k));
        }
    }
    let l1 = terms.iter().map(|t| t.0.norm()).sum();
    Ok(FnlDecomposition { terms, l1 })
}

/// Axis of a `noisy_rot` channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotAxis {
    /// `X` on one qubit.
    X,
    /// `Y` on one qubit.
    Y,
    /// `ZZ` on two qubits.
    Zz,
}

/// Noise source of a `noisy_rzz` channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZNoise {
    /// `Z⊗Z` noise.
    Zz,
    /// `Z` on the first target.
    Z1,
    /// `Z` on the second target.
    Z2,
    /// `(Z_1 + Z_2 + Z_1 Z_2)/3` noise.
    General,
}

/// Closed vocabulary of noisy channels.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// Pauli rotation with noise along its own axis.
    NoisyRot { axis: RotAxis, theta: f64, p: f64, targets: Vec<usize> },
    /// `ZZ` rotation with `Z`-type noise.
    NoisyRzz { noise: ZNoise, theta: f64, p: f64, adaptive: bool, targets: [usize; 2] },
}

impl ChannelSpec {
    /// Target qubits.
    pub fn targets(&self) -> Vec<usize> {
        match self {
            ChannelSpec::NoisyRot { targets, .. } => targets.clone(),
            ChannelSpec::NoisyRzz { targets, .. } => targets.to_vec(),
        }
    }

    fn axis(&self) -> Result<PauliAxis> {
        match self {
            ChannelSpec::NoisyRot { axis, targets, .. } => match (axis, targets.as_slice()) {
                (RotAxis::X, [q]) => Ok(PauliAxis::X(*q)),
                (RotAxis::Y, [q]) => Ok(PauliAxis::Y(*q)),
                (RotAxis::Zz, [a, b]) => Ok(PauliAxis::Zz(*a, *b)),
                _ => invalid(format!("axis {axis:?} does not match {} target(s)", targets.len())),
            },
            ChannelSpec::NoisyRzz { targets, .. } => Ok(PauliAxis::Zz(targets[0], targets[1])),
        }
    }

    /// Checks targets and parameters against `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.axis()?.validate(n)?;
        match self {
            ChannelSpec::NoisyRot { p, .. } | ChannelSpec::NoisyRzz { p, .. } => check_p(*p),
        }
    }

    /// `true` if the decomposition contains measure-and-feed-forward branches.
    pub fn is_adaptive(&self) -> bool {
        matches!(self, ChannelSpec::NoisyRzz { adaptive: true, noise, .. } if *noise != ZNoise::Zz)
    }

    /// Best available decomposition on an `n`-qubit register.
    pub fn decompose(&self, n: usize) -> Result<ChannelDecomposition> {
        self.validate(n)?;
        match *self {
            ChannelSpec::NoisyRot { theta, p, .. } => equimagical_noisy_rotation(&self.axis()?, theta, p, n),
            ChannelSpec::NoisyRzz { noise, theta, p, adaptive, targets } => match (noise, adaptive) {
                (ZNoise::Zz, _) => equimagical_noisy_rotation(&self.axis()?, theta, p, n),
                (ZNoise::Z1, true) => adaptive_nzz_single_z(theta, p, NoisyQubit::First, targets, n),
                (ZNoise::Z2, true) => adaptive_nzz_single_z(theta, p, NoisyQubit::Second, targets, n),
                (ZNoise::Z1, false) => single_z_noise_naive(theta, p, targets[0], targets, n),
                (ZNoise::Z2, false) => single_z_noise_naive(theta, p, targets[1], targets, n),
                (ZNoise::General, a) => general_dephasing_decomposition(theta, p, a, targets, n),
            },
        }
    }

    /// Defining Kraus form built directly from Pauli matrices.
    pub fn defining_channel(&self, n: usize) -> Result<DenseChannel> {
        self.validate(n)?;
        let axis = self.axis()?;
        let (theta, p) = match *self {
            ChannelSpec::NoisyRot { theta, p, .. } | ChannelSpec::NoisyRzz { theta, p, .. } => (theta, p),
        };
        let ax = axis.dense(n)?;
        let rot = pauli_rotation(&ax, theta);
        let t = self.targets();
        let z = |q: usize| embed(n, &[q], &pauli_z());
        let errors: Vec<(f64, CMatrix)> = match self {
            ChannelSpec::NoisyRot { .. } | ChannelSpec::NoisyRzz { noise: ZNoise::Zz, .. } => vec![(p, ax.clone())],
            ChannelSpec::NoisyRzz { noise: ZNoise::Z1, .. } => vec![(p, z(t[0])?)],
            ChannelSpec::NoisyRzz { noise: ZNoise::Z2, .. } => vec![(p, z(t[1])?)],
            ChannelSpec::NoisyRzz { noise: ZNoise::General, .. } => {
                vec![(p / 3.0, z(t[0])?), (p / 3.0, z(t[1])?), (p / 3.0, z(t[0])? * z(t[1])?)]
            }
        };
        let mut ops = vec![(1.0 - errors.iter().map(|e| e.0).sum::<f64>(), rot.clone())];
        ops.extend(errors.into_iter().map(|(w, e)| (w, e * &rot)));
        Ok(DenseChannel { n, ops })
    }

    /// Same channel moved onto `targets`.
    pub fn retargeted(&self, new_targets: &[usize]) -> Result<ChannelSpec> {
        let mut c = self.clone();
        match &mut c {
            ChannelSpec::NoisyRot { targets, .. } => {
                if targets.len() != new_targets.len() {
                    return invalid("target count mismatch");
                }
                *targets = new_targets.to_vec();
            }
            ChannelSpec::NoisyRzz { targets, .. } => {
                let [a, b] = new_targets else { return invalid("noisy_rzz takes two targets") };
                *targets = [*a, *b];
            }
        }
        Ok(c)
    }
}

/// What one oracle entry produces.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleEntry {
    /// A unitary gate with a fixed decomposition.
    Gate(UnitaryDecomposition),
    /// A channel sampled branch by branch.
    Channel(ChannelDecomposition),
}

/// Deterministic sampler of branch decompositions for registered elements.
#[derive(Debug, Clone, Default)]
pub struct DecompositionOracle {
    entries: Vec<ChannelDecomposition>,
}

impl DecompositionOracle {
    /// Empty oracle.
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an element and returns its descriptor.
    pub fn register(&mut self, entry: OracleEntry) -> usize {
        let ch = match entry {
            OracleEntry::Gate(u) => ChannelDecomposition::unitary(u),
            OracleEntry::Channel(c) => c,
        };
        self.entries.push(ch);
        self.entries.len() - 1
    }

    /// Registered decomposition.
    pub fn get(&self, id: usize) -> Result<&ChannelDecomposition> {
        self.entries.get(id).ok_or_else(|| Error::InvalidArgument(format!("unregistered channel descriptor {id}")))
    }

    /// Number of registered entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `true` when nothing is registered.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Branch drawn for `(seed, draw)`; reproducible regardless of call order.
    pub fn sample(&self, id: usize, seed: u64, draw: u64) -> Result<&Branch> {
        let i = self.sample_index(id, seed, draw)?;
        Ok(&self.entries[id].branches[i])
    }

    /// Index of the branch [`Self::sample`] returns.
    pub fn sample_index(&self, id: usize, seed: u64, draw: u64) -> Result<usize> {
        let ch = self.get(id)?;
        let u: f64 = keyed(seed, &[0x0ac1e, id as u64, draw]).gen();
        Ok(ch.pick(u))
    }

    /// `Σ_j p_j ‖c_j‖₁²` (adaptive branches count their weight).
    pub fn cost(&self, id: usize) -> Result<f64> {
        Ok(self.get(id)?.cost)
    }
}

/// Dense local matrix of a gate on `n` qubits.
pub fn dense_gate(gate: &Gate, n: usize) -> Result<CMatrix> {
    gate.validate(n)?;
    embed(n, &gate.targets(), &gate.local_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_example_parameters() {
        let (phi, s) = equimagical_parameters(PI / 2.0, 0.25);
        assert!((phi - PI / 6.0).abs() < 1e-12);
        assert!((s - 0.5).abs() < 1e-12);
        let d = equimagical_noisy_rotation(&PauliAxis::Y(0), PI / 2.0, 0.25, 1).unwrap();
        assert!((d.cost - 1.5).abs() < 1e-12);
        assert!(d.equimagical);
        assert_eq!(d.optimal_flag, OptimalFlag::ExtentOptimal);
    }

    #[test]
    fn p_out_of_range() {
        assert!(equimagical_noisy_rotation(&PauliAxis::Y(0), 0.3, 0.6, 1).is_err());
        assert!(adaptive_nzz_single_z(0.3, -0.1, NoisyQubit::First, [0, 1], 2).is_err());
    }

    #[test]
    fn noiseless_limits() {
        let d = equimagical_noisy_rotation(&PauliAxis::Zz(0, 1), 0.4, 0.0, 2).unwrap();
        assert_eq!(d.branches.len(), 1);
        assert!((d.cost - (1.0 + 0.4f64.sin())).abs() < 1e-12);
        let a = adaptive_nzz_single_z(0.4, 0.5, NoisyQubit::First, [0, 1], 2).unwrap();
        assert_eq!(a.branches.len(), 1);
        assert!((a.cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_unknown() {
        let o = DecompositionOracle::new();
        assert!(o.cost(0).is_err());
        assert!(o.sample(3, 1, 1).is_err());
    }
}
