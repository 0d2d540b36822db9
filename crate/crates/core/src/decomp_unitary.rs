//! Decompositions of non-Gaussian unitaries and states into superpositions
//! of Gaussian ones, with the fermionic two-qubit KAK solver and the gadget
//! lifting check.

use crate::error::{invalid, Result};
use crate::gates::Gate;
use crate::gaussian::{GaussianCircuit, GaussianState, Generator, NamedGate};
use crate::linalg::{max_abs_diff, CMatrix, C64, I, ONE, ZERO};
use crate::oracle::{bell_pair_state, dense_gaussian_operator, embed, DenseState};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

/// Coefficients below this magnitude are dropped from decompositions.
pub const COEFF_CUTOFF: f64 = 1e-15;

/// A non-Gaussian unitary as `Σ_j c_j K_j` with Gaussian `K_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDecomposition {
    /// Qubit count of every circuit.
    pub n: usize,
    /// Coefficient and Gaussian circuit per term.
    pub terms: Vec<(C64, GaussianCircuit)>,
    /// `Σ |c_j|`.
    pub l1_norm: f64,
    /// Extent value the decomposition is claimed to achieve.
    pub extent_claim: Option<f64>,
    /// `true` when the decomposition is proven extent-optimal.
    pub optimal: bool,
    /// Qubits the unitary acts on.
    pub support: Vec<usize>,
}

impl UnitaryDecomposition {
    /// Builds a decomposition, dropping negligible terms and caching `Σ|c|`.
    pub fn new(n: usize, terms: Vec<(C64, GaussianCircuit)>, extent_claim: Option<f64>, optimal: bool, support: Vec<usize>) -> Self {
        let terms: Vec<_> = terms.into_iter().filter(|(c, _)| c.norm() >= COEFF_CUTOFF).collect();
        let l1_norm = terms.iter().map(|(c, _)| c.norm()).sum();
        UnitaryDecomposition { n, terms, l1_norm, extent_claim, optimal, support }
    }

    /// Single Gaussian term with coefficient 1.
    pub fn gaussian(circ: GaussianCircuit, support: Vec<usize>) -> Self {
        let n = circ.n;
        Self::new(n, vec![(ONE, circ)], Some(1.0), true, support)
    }

    /// Identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self::gaussian(GaussianCircuit::new(n), Vec::new())
    }

    /// `‖c‖₁²`.
    pub fn l1_squared(&self) -> f64 {
        self.l1_norm * self.l1_norm
    }

    /// Number of terms.
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Dense reconstruction `Σ c_j K_j`.
    pub fn dense(&self) -> Result<CMatrix> {
        let dim = 1 << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, k) in &self.terms {
            m += dense_gaussian_operator(k)?.mat * *c;
        }
        Ok(m)
    }

    /// Product `other · self` (apply `self` first), built termwise.
    pub fn then(&self, other: &UnitaryDecomposition) -> Result<UnitaryDecomposition> {
        if self.n != other.n {
            return invalid("composing decompositions on different qubit counts");
        }
        let mut terms = Vec::with_capacity(self.rank() * other.rank());
        for (c1, k1) in &self.terms {
            for (c2, k2) in &other.terms {
                terms.push((c1 * c2, k1.clone().then(k2)));
            }
        }
        let disjoint = self.support.iter().all(|q| !other.support.contains(q));
        let claim = match (self.extent_claim, other.extent_claim) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        let mut support = self.support.clone();
        support.extend(other.support.iter().copied().filter(|q| !self.support.contains(q)));
        Ok(Self::new(self.n, terms, claim, self.optimal && other.optimal && disjoint, support))
    }

    /// `true` if every term circuit validates.
    pub fn is_structurally_gaussian(&self) -> bool {
        self.terms.iter().all(|(_, k)| k.n == self.n && k.validate().is_ok())
    }
}

/// Catalog entries with analytic decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogGate {
    /// `exp(-iθZZ/2)`.
    Rzz,
    /// `diag(1,1,1,e^{iθ})`.
    Cphase,
    /// Nearest-neighbour swap.
    SwapNn,
    /// Hadamard.
    Hadamard,
    /// `exp(-iθY/2)`.
    Ry,
    /// `exp(-iθX/2)`.
    Rx,
}

impl CatalogGate {
    /// Parses a catalog identifier.
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "rzz" => CatalogGate::Rzz,
            "cphase" => CatalogGate::Cphase,
            "swap_nn" | "swap" => CatalogGate::SwapNn,
            "hadamard" | "h" => CatalogGate::Hadamard,
            "ry" => CatalogGate::Ry,
            "rx" => CatalogGate::Rx,
            other => return invalid(format!("unknown catalog gate '{other}'")),
        })
    }

    fn arity(self) -> usize {
        match self {
            CatalogGate::Rzz | CatalogGate::Cphase | CatalogGate::SwapNn => 2,
            _ => 1,
        }
    }

    fn needs_theta(self) -> bool {
        !matches!(self, CatalogGate::SwapNn | CatalogGate::Hadamard)
    }
}

fn circ(n: usize, gates: &[NamedGate]) -> GaussianCircuit {
    GaussianCircuit::from_gates(n, gates.iter().map(|&g| Generator::Named(g)).collect())
}

/// Table decomposition of a catalog gate on `qubits` of an `n`-qubit register.
pub fn optimal_unitary_decomposition(gate: CatalogGate, theta: Option<f64>, qubits: &[usize], n: usize) -> Result<UnitaryDecomposition> {
    if qubits.len() != gate.arity() {
        return invalid(format!("{gate:?} takes {} target(s), got {}", gate.arity(), qubits.len()));
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return invalid(format!("target {q} out of range for n={n}"));
    }
    if qubits.len() == 2 && qubits[0] == qubits[1] {
        return invalid("targets must differ");
    }
    let theta = match (gate.needs_theta(), theta) {
        (true, Some(t)) => t,
        (true, None) => return invalid(format!("{gate:?} needs an angle")),
        (false, _) => 0.0,
    };
    let support = qubits.to_vec();
    let d = match gate {
        CatalogGate::Rzz => {
            let (q0, q1) = (qubits[0], qubits[1]);
            let (s, c) = (theta / 2.0).sin_cos();
            UnitaryDecomposition::new(
                n,
                vec![(C64::new(c, 0.0), GaussianCircuit::new(n)), (-I * s, circ(n, &[NamedGate::Z(q0), NamedGate::Z(q1)]))],
                Some(1.0 + theta.sin().abs()),
                true,
                support,
            )
        }
        CatalogGate::Cphase => {
            let (q0, q1) = (qubits[0], qubits[1]);
            let pre = [NamedGate::Rz { q: q0, theta: theta / 2.0 }, NamedGate::Rz { q: q1, theta: theta / 2.0 }];
            let ph = C64::from_polar(1.0, theta / 4.0);
            let (s, c) = (theta / 4.0).sin_cos();
            UnitaryDecomposition::new(
                n,
                vec![
                    (ph * c, circ(n, &pre)),
                    (ph * I * s, circ(n, &[pre[0], pre[1], NamedGate::Z(q0), NamedGate::Z(q1)])),
                ],
                Some(1.0 + (theta / 2.0).sin().abs()),
                true,
                support,
            )
        }
        CatalogGate::SwapNn => {
            let q = qubits[0].min(qubits[1]);
            if qubits[0].abs_diff(qubits[1]) != 1 {
                return invalid("swap_nn needs adjacent targets");
            }
            let pre = [NamedGate::Rz { q, theta: FRAC_PI_2 }, NamedGate::Rz { q: q + 1, theta: FRAC_PI_2 }];
            let coef = C64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4);
            UnitaryDecomposition::new(
                n,
                vec![
                    (coef, circ(n, &[pre[0], pre[1], NamedGate::Fswap(q)])),
                    (coef * I, circ(n, &[pre[0], pre[1], NamedGate::Z(q), NamedGate::Z(q + 1), NamedGate::Fswap(q)])),
                ],
                Some(2.0),
                true,
                support,
            )
        }
        CatalogGate::Hadamard => {
            let q = qubits[0];
            let h = C64::new(FRAC_1_SQRT_2, 0.0);
            UnitaryDecomposition::new(n, vec![(h, circ(n, &[NamedGate::Z(q)])), (h, circ(n, &[NamedGate::X(q)]))], Some(2.0), true, support)
        }
        CatalogGate::Ry | CatalogGate::Rx => {
            let q = qubits[0];
            let p = if gate == CatalogGate::Ry { NamedGate::Y(q) } else { NamedGate::X(q) };
            let (s, c) = (theta / 2.0).sin_cos();
            UnitaryDecomposition::new(
                n,
                vec![(C64::new(c, 0.0), GaussianCircuit::new(n)), (-I * s, circ(n, &[p]))],
                Some(1.0 + theta.sin().abs()),
                true,
                support,
            )
        }
    };
    Ok(d)
}

/// Decomposition of any vocabulary gate: Gaussian gates give one term,
/// catalog gates their table form, and parity-preserving 4×4 gates the KAK form.
pub fn gate_decomposition(gate: &Gate, n: usize) -> Result<UnitaryDecomposition> {
    gate.validate(n)?;
    if let Some(gens) = gate.gaussian_generators() {
        return Ok(UnitaryDecomposition::gaussian(GaussianCircuit::from_gates(n, gens), gate.targets()));
    }
    let t = gate.targets();
    match gate {
        Gate::Rzz { theta, .. } => optimal_unitary_decomposition(CatalogGate::Rzz, Some(*theta), &t, n),
        Gate::Cphase { theta, .. } => optimal_unitary_decomposition(CatalogGate::Cphase, Some(*theta), &t, n),
        Gate::Swap { q0, q1 } if q0.abs_diff(*q1) == 1 => optimal_unitary_decomposition(CatalogGate::SwapNn, None, &t, n),
        Gate::H(_) => optimal_unitary_decomposition(CatalogGate::Hadamard, None, &t, n),
        Gate::Ry { theta, .. } => optimal_unitary_decomposition(CatalogGate::Ry, Some(*theta), &t, n),
        Gate::Rx { theta, .. } => optimal_unitary_decomposition(CatalogGate::Rx, Some(*theta), &t, n),
        Gate::Swap { .. } | Gate::CustomU4 { .. } => decompose_two_qubit_fermionic(&gate.local_matrix(), [t[0], t[1]], n),
        _ => unreachable!("gaussian gates handled above"),
    }
}

/// Parameters of `U = (R_Z(t1)⊗R_Z(t2)) R_XX(a) R_YY(b) R_ZZ(c) (R_Z(t3)⊗R_Z(t4))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitFermionicParams {
    /// Left Z rotation on the first qubit.
    pub t1: f64,
    /// Left Z rotation on the second qubit.
    pub t2: f64,
    /// Right Z rotation on the first qubit.
    pub t3: f64,
    /// Right Z rotation on the second qubit.
    pub t4: f64,
    /// XX angle.
    pub a: f64,
    /// YY angle.
    pub b: f64,
    /// ZZ angle, the only non-Gaussian factor.
    pub c: f64,
}

impl TwoQubitFermionicParams {
    /// Dense product form (no global phase).
    pub fn unitary(&self) -> CMatrix {
        let rz = |t| Gate::Rz { q: 0, theta: t }.local_matrix();
        let xx = Gate::RxxNn { q: 0, theta: self.a }.local_matrix();
        let yy = Gate::RyyNn { q: 0, theta: self.b }.local_matrix();
        let zz = Gate::Rzz { q0: 0, q1: 1, theta: self.c }.local_matrix();
        rz(self.t1).kronecker(&rz(self.t2)) * xx * yy * zz * rz(self.t3).kronecker(&rz(self.t4))
    }

    /// `1 + |sin c|`.
    pub fn extent(&self) -> f64 {
        1.0 + self.c.sin().abs()
    }
}

/// `B = e^{iγ} R_z(σ1) R_x(α) R_z(σ2)`, returns `(γ, σ1, α, σ2)`.
fn zxz(b: &[[C64; 2]; 2]) -> (f64, f64, f64, f64) {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let gamma = det.arg() / 2.0;
    let ph = C64::from_polar(1.0, -gamma);
    let bp = [[b[0][0] * ph, b[0][1] * ph], [b[1][0] * ph, b[1][1] * ph]];
    let alpha = 2.0 * bp[1][0].norm().atan2(bp[0][0].norm());
    let p = if bp[1][1].norm() > 1e-12 { bp[1][1].arg() } else { 0.0 };
    let m = if bp[1][0].norm() > 1e-12 { bp[1][0].arg() + FRAC_PI_2 } else { 0.0 };
    (gamma, p + m, alpha, p - m)
}

fn wrap(x: f64, period: f64) -> f64 {
    // into (-period/2, period/2]
    let mut y = x.rem_euclid(period);
    if y > period / 2.0 {
        y -= period;
    }
    y
}

/// Checks that a 4×4 matrix is unitary and commutes with `Z⊗Z`.
pub fn check_parity_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    if u.shape() != (4, 4) {
        return invalid("expected a 4×4 matrix");
    }
    let d = max_abs_diff(&(u.adjoint() * u), &crate::linalg::eye(4));
    if d > tol.max(1e-10) {
        return invalid(format!("matrix is not unitary (defect {d:.3e})"));
    }
    let even = [0usize, 3];
    let odd = [1usize, 2];
    for &r in &even {
        for &c in &odd {
            if u[(r, c)].norm() > tol || u[(c, r)].norm() > tol {
                return invalid("gate does not preserve parity");
            }
        }
    }
    Ok(())
}

/// Fermionic KAK parameters and global phase `φ` with `U = e^{iφ} · params.unitary()`.
/// `c` is normalized into `(-π/2, π/2]`; Z angles lie in `(-2π, 2π]`.
pub fn kak_fermionic(u: &CMatrix, parity_tol: f64) -> Result<(TwoQubitFermionicParams, f64)> {
    check_parity_unitary(u, parity_tol)?;
    let be = [[u[(0, 0)], u[(0, 3)]], [u[(3, 0)], u[(3, 3)]]];
    let bo = [[u[(1, 1)], u[(1, 2)]], [u[(2, 1)], u[(2, 2)]]];
    let (ge, s1e, ae, s2e) = zxz(&be);
    let (go, s1o, ao, s2o) = zxz(&bo);
    let mut phase = (ge + go) / 2.0;
    let mut c = go - ge;
    let mut t1 = (s1e + s1o) / 2.0;
    let mut t2 = (s1e - s1o) / 2.0;
    let t3 = (s2e + s2o) / 2.0;
    let t4 = (s2e - s2o) / 2.0;
    while c > FRAC_PI_2 {
        c -= PI;
        phase += FRAC_PI_2;
        t1 -= PI;
        t2 -= PI;
    }
    while c <= -FRAC_PI_2 {
        c += PI;
        phase -= FRAC_PI_2;
        t1 += PI;
        t2 += PI;
    }
    let w = |t| wrap(t, 4.0 * PI);
    let p = TwoQubitFermionicParams { t1: w(t1), t2: w(t2), t3: w(t3), t4: w(t4), a: (ao + ae) / 2.0, b: (ao - ae) / 2.0, c };
    Ok((p, phase))
}

fn swap_conjugate(u: &CMatrix) -> CMatrix {
    let s = Gate::Swap { q0: 0, q1: 1 }.local_matrix();
    &s * u * &s
}

/// Decomposition of a parity-preserving two-qubit gate on `targets`.
///
/// Adjacent or diagonal gates get the optimal two-term form; other
/// non-adjacent gates get the eight-term product form (`optimal = false`).
pub fn decompose_two_qubit_fermionic(u: &CMatrix, targets: [usize; 2], n: usize) -> Result<UnitaryDecomposition> {
    let [t0, t1] = targets;
    if t0 >= n || t1 >= n || t0 == t1 {
        return invalid(format!("bad targets {targets:?} for n={n}"));
    }
    let (q0, q1, u) = if t0 < t1 { (t0, t1, u.clone()) } else { (t1, t0, swap_conjugate(u)) };
    let (p, phase) = kak_fermionic(&u, 1e-9)?;
    let g = C64::from_polar(1.0, phase);
    let support = vec![q0, q1];
    let diagonal = p.a.abs() < 1e-12 && p.b.abs() < 1e-12;
    let adjacent = q1 == q0 + 1;
    let pre = vec![NamedGate::Rz { q: q0, theta: p.t3 }, NamedGate::Rz { q: q1, theta: p.t4 }];
    let post = vec![NamedGate::Rz { q: q0, theta: p.t1 }, NamedGate::Rz { q: q1, theta: p.t2 }];
    let (sc, cc) = (p.c / 2.0).sin_cos();
    let zz_terms = [(C64::new(cc, 0.0), vec![]), (-I * sc, vec![NamedGate::Z(q0), NamedGate::Z(q1)])];
    if adjacent || diagonal {
        let mid: Vec<NamedGate> = if diagonal {
            vec![]
        } else {
            vec![NamedGate::RyyNn { q: q0, theta: p.b }, NamedGate::RxxNn { q: q0, theta: p.a }]
        };
        let terms = zz_terms
            .iter()
            .map(|(c, zz)| {
                let gates: Vec<NamedGate> = pre.iter().chain(zz).chain(&mid).chain(&post).copied().collect();
                (g * c, circ(n, &gates))
            })
            .collect();
        return Ok(UnitaryDecomposition::new(n, terms, Some(p.extent()), true, support));
    }
    let (sa, ca) = (p.a / 2.0).sin_cos();
    let (sb, cb) = (p.b / 2.0).sin_cos();
    let xx_terms = [(C64::new(ca, 0.0), vec![]), (-I * sa, vec![NamedGate::X(q0), NamedGate::X(q1)])];
    let yy_terms = [(C64::new(cb, 0.0), vec![]), (-I * sb, vec![NamedGate::Y(q0), NamedGate::Y(q1)])];
    let mut terms = Vec::with_capacity(8);
    for (cz, gz) in &zz_terms {
        for (cy, gy) in &yy_terms {
            for (cx, gx) in &xx_terms {
                let gates: Vec<NamedGate> = pre.iter().chain(gz).chain(gy).chain(gx).chain(&post).copied().collect();
                terms.push((g * cz * cy * cx, circ(n, &gates)));
            }
        }
    }
    let claim = (1.0 + p.a.sin().abs()) * (1.0 + p.b.sin().abs()) * p.extent();
    Ok(UnitaryDecomposition::new(n, terms, Some(claim), false, support))
}

/// A state `Σ_j c_j K_j P |0^n>` with Gaussian preparation `P` and terms `K_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDecomposition {
    /// Qubit count.
    pub n: usize,
    /// Shared Gaussian preparation applied first.
    pub prep: GaussianCircuit,
    /// Coefficients and Gaussian circuits applied after `prep`.
    pub terms: Vec<(C64, GaussianCircuit)>,
}

impl StateDecomposition {
    /// `Σ |c_j|`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// `‖c‖₁²`.
    pub fn extent(&self) -> f64 {
        self.l1_norm().powi(2)
    }

    /// Term states as phase-tracked Gaussian states.
    pub fn states(&self) -> Result<Vec<(C64, GaussianState)>> {
        let base = GaussianState::vacuum(self.n).evolve_circuit(&self.prep)?;
        self.terms.iter().map(|(c, k)| Ok((*c, base.evolve_circuit(k)?))).collect()
    }

    /// Dense sum of the terms.
    pub fn dense(&self) -> Result<DenseState> {
        let mut out = DenseState { n: self.n, amps: vec![ZERO; 1 << self.n] };
        for (c, s) in self.states()? {
            out.add_scaled(c, &crate::oracle::dense_state_from_gaussian(&s)?);
        }
        Ok(out)
    }
}

/// Preparation of `|ψ+>^{⊗2}` from `|0000>`.
pub fn bell_pair_prep() -> GaussianCircuit {
    circ(4, &[NamedGate::RxyNn { q: 0, theta: FRAC_PI_2 }, NamedGate::RxyNn { q: 2, theta: FRAC_PI_2 }])
}

/// Two-term decomposition of `|m_θ> = (I⊗C(θ)⊗I)|ψ+>^{⊗2}`; returns the
/// decomposition and its extent `1 + |sin(θ/2)|`.
pub fn magic_state_decomposition(theta: f64) -> (StateDecomposition, f64) {
    let c = optimal_unitary_decomposition(CatalogGate::Cphase, Some(theta), &[1, 2], 4).expect("valid catalog call");
    let d = StateDecomposition { n: 4, prep: bell_pair_prep(), terms: c.terms };
    let e = d.extent();
    (d, e)
}

/// Gadget state decomposition `(I⊗V⊗I)|ψ+>^{⊗2}` from a 2-qubit decomposition of `V`.
pub fn gadget_state_decomposition(v: &UnitaryDecomposition) -> Result<StateDecomposition> {
    if v.n != 2 {
        return invalid("gadget states need a 2-qubit decomposition");
    }
    let terms = v
        .terms
        .iter()
        .map(|(c, k)| Ok((*c, shift_circuit(k, 4, 1)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateDecomposition { n: 4, prep: bell_pair_prep(), terms })
}

/// One qubit of a plus-state pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlusPattern {
    /// `|0>`.
    Zero,
    /// `|1>`.
    One,
    /// `(|0> + e^{iδ}|1>)/√2`.
    Plus(f64),
}

/// Gaussian decomposition of a product of `|0>`, `|1>` and phased plus
/// states: two terms of weight `1/√2` (even and odd parity) when any plus
/// state is present, else one term. Returns the decomposition and extent.
pub fn plus_state_decomposition(pattern: &[PlusPattern]) -> Result<(StateDecomposition, f64)> {
    let n = pattern.len();
    if n == 0 {
        return invalid("empty pattern");
    }
    let mut prep = GaussianCircuit::new(n);
    for (q, p) in pattern.iter().enumerate() {
        if *p == PlusPattern::One {
            prep.push(Generator::Named(NamedGate::X(q)));
        }
    }
    let plus: Vec<(usize, f64)> = pattern
        .iter()
        .enumerate()
        .filter_map(|(q, p)| if let PlusPattern::Plus(d) = p { Some((q, *d)) } else { None })
        .collect();
    if plus.is_empty() {
        let d = StateDecomposition { n, prep, terms: vec![(ONE, GaussianCircuit::new(n))] };
        return Ok((d, 1.0));
    }
    for w in plus.windows(2) {
        let (i, j) = (w[0].0, w[1].0);
        let ones_between = pattern[i + 1..j].iter().filter(|p| **p == PlusPattern::One).count();
        let s = if ones_between % 2 == 0 { 1.0 } else { -1.0 };
        prep.push(Generator::Rotation { j: 2 * i + 1, k: 2 * j + 1, theta: -s * FRAC_PI_2 });
    }
    let phases: Vec<NamedGate> = plus.iter().map(|&(q, d)| NamedGate::Rz { q, theta: d }).collect();
    let total: f64 = plus.iter().map(|&(_, d)| d).sum();
    let coef = C64::from_polar(FRAC_1_SQRT_2, total / 2.0);
    let even = circ(n, &phases);
    let mut odd_gates = vec![NamedGate::X(plus[0].0)];
    odd_gates.extend(phases.iter().copied());
    let odd = circ(n, &odd_gates);
    let d = StateDecomposition { n, prep, terms: vec![(coef, even), (coef, odd)] };
    Ok((d, 2.0))
}

/// Re-targets a circuit: generators move up by `by` qubits into an `n`-qubit register.
fn shift_circuit(k: &GaussianCircuit, n: usize, by: usize) -> Result<GaussianCircuit> {
    let gates = k
        .gates
        .iter()
        .map(|g| match *g {
            Generator::Named(ng) => {
                let up = match ng {
                    NamedGate::Rz { q, theta } => NamedGate::Rz { q: q + by, theta },
                    NamedGate::RxxNn { q, theta } => NamedGate::RxxNn { q: q + by, theta },
                    NamedGate::RyyNn { q, theta } => NamedGate::RyyNn { q: q + by, theta },
                    NamedGate::RxyNn { q, theta } => NamedGate::RxyNn { q: q + by, theta },
                    NamedGate::X(q) => NamedGate::X(q + by),
                    NamedGate::Y(q) => NamedGate::Y(q + by),
                    NamedGate::Z(q) => NamedGate::Z(q + by),
                    NamedGate::Fswap(q) => NamedGate::Fswap(q + by),
                };
                Ok(Generator::Named(up))
            }
            Generator::Rotation { j, k, theta } => Ok(Generator::Rotation { j: j + 2 * by, k: k + 2 * by, theta }),
            Generator::Phase(p) => Ok(Generator::Phase(p)),
            Generator::Majorana(_) => invalid("single Majorana operators cannot be re-targeted"),
        })
        .collect::<Result<Vec<_>>>()?;
    let c = GaussianCircuit::from_gates(n, gates);
    c.validate()?;
    Ok(c)
}

/// Inverse of [`shift_circuit`] onto `n` qubits; generators must stay in range.
fn unshift_circuit(k: &GaussianCircuit, n: usize, by: usize) -> Result<GaussianCircuit> {
    let gates = k
        .gates
        .iter()
        .map(|g| match *g {
            Generator::Named(ng) => ng
                .shifted_down(by)
                .map(Generator::Named)
                .ok_or_else(|| crate::error::Error::InvalidArgument(format!("{ng:?} acts outside the gadget qubits"))),
            Generator::Rotation { j, k, theta } if j >= 2 * by && k >= 2 * by => {
                Ok(Generator::Rotation { j: j - 2 * by, k: k - 2 * by, theta })
            }
            Generator::Phase(p) => Ok(Generator::Phase(p)),
            _ => invalid(format!("{g:?} cannot be lifted")),
        })
        .collect::<Result<Vec<_>>>()?;
    let c = GaussianCircuit::from_gates(n, gates);
    c.validate()?;
    Ok(c)
}

/// Outcome of the gadget lifting check.
#[derive(Debug, Clone)]
pub struct LiftReport {
    /// `‖A(I⊗|v⟩⊗I) − V‖_max`.
    pub gadget_error: f64,
    /// Lifted decomposition of `V`, when a state decomposition was supplied.
    pub lifted: Option<UnitaryDecomposition>,
    /// `‖Σ c_j K_j − V‖_max` of the lifted decomposition.
    pub reconstruction_error: Option<f64>,
}

/// Gadget operator applied to `|v>`: `A(I⊗|v⟩⊗I)[(o1,o2),(a,b)] = 2 v(a,o1,o2,b)`.
pub fn gadget_operator(v: &DenseState) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for o in 0..4usize {
        for a in 0..2usize {
            for b in 0..2usize {
                let idx = (a << 3) | (o << 1) | b;
                m[(o, (a << 1) | b)] = v.amps[idx] * 2.0;
            }
        }
    }
    m
}

/// Checks the gadget identity for `V` and, given a decomposition of the
/// gadget state `(I⊗V⊗I)|ψ+>^{⊗2}`, lifts it to a decomposition of `V`.
pub fn lift_gadget(v: &CMatrix, state: Option<&StateDecomposition>) -> Result<LiftReport> {
    check_parity_unitary(v, 1e-9)?;
    let g = bell_pair_state();
    let mid = embed(4, &[1, 2], v)?;
    let vstate = DenseState { n: 4, amps: (mid * g.to_vector()).iter().copied().collect() };
    let gadget_error = max_abs_diff(&gadget_operator(&vstate), v);
    let (lifted, reconstruction_error) = match state {
        None => (None, None),
        Some(sd) => {
            if sd.n != 4 || sd.prep != bell_pair_prep() {
                return invalid("state decomposition must be built on the Bell-pair preparation");
            }
            let terms = sd
                .terms
                .iter()
                .map(|(c, k)| Ok((*c, unshift_circuit(k, 2, 1)?)))
                .collect::<Result<Vec<_>>>()?;
            let l1: f64 = terms.iter().map(|(c, _)| c.norm()).sum();
            let ud = UnitaryDecomposition::new(2, terms, Some(l1 * l1), false, vec![0, 1]);
            let err = max_abs_diff(&ud.dense()?, v);
            (Some(ud), Some(err))
        }
    };
    Ok(LiftReport { gadget_error, lifted, reconstruction_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rzz_zero_is_single_term() {
        let d = optimal_unitary_decomposition(CatalogGate::Rzz, Some(0.0), &[0, 1], 2).unwrap();
        assert_eq!(d.rank(), 1);
        assert!((d.l1_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_terms() {
        let d = optimal_unitary_decomposition(CatalogGate::Hadamard, None, &[0], 1).unwrap();
        assert_eq!(d.rank(), 2);
        assert!((d.l1_squared() - 2.0).abs() < 1e-12);
        let h = Gate::H(0).local_matrix();
        assert!(max_abs_diff(&d.dense().unwrap(), &h) < 1e-12);
    }

    #[test]
    fn catalog_errors() {
        assert!(CatalogGate::parse("toffoli").is_err());
        assert!(optimal_unitary_decomposition(CatalogGate::SwapNn, None, &[0, 2], 3).is_err());
        assert!(optimal_unitary_decomposition(CatalogGate::Rzz, None, &[0, 1], 2).is_err());
    }

    #[test]
    fn kak_of_rzz_is_canonical() {
        let u = Gate::Rzz { q0: 0, q1: 1, theta: 0.7 }.local_matrix();
        let (p, phase) = kak_fermionic(&u, 1e-10).unwrap();
        assert!(p.a.abs() < 1e-12 && p.b.abs() < 1e-12);
        assert!((p.c - 0.7).abs() < 1e-12);
        let rec = p.unitary() * C64::from_polar(1.0, phase);
        assert!(max_abs_diff(&rec, &u) < 1e-12);
    }

    #[test]
    fn kak_rejects_parity_violation() {
        let u = Gate::H(0).local_matrix().kronecker(&crate::linalg::eye(2));
        assert!(kak_fermionic(&u, 1e-10).is_err());
    }
}
