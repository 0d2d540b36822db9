//! Phase-tracked pure fermionic Gaussian states and Gaussian circuits.
//!
//! Conventions: qubits `0..n`, Majorana operators `c_{2j} = Z^{<j} X_j` and
//! `c_{2j+1} = Z^{<j} Y_j`. The covariance matrix is `Γ_ab = -i<c_a c_b>`
//! for `a != b`, so `Γ_{2j,2j+1} = <Z_j>` and `p(0) = (1 + Γ_{2j,2j+1})/2`.
//! Basis configurations are bitmasks with bit `q` holding qubit `q`.
//!
//! Phases are tracked against a pivot configuration `x` with `|<x|ψ>| > 0`:
//! the state stores `<x|ψ>` together with the Thouless matrix relative to
//! `x`, from which every amplitude is a Pfaffian.

use crate::error::{invalid, Error, Result};
use crate::linalg::{pfaffian, principal, CMatrix, RMatrix, C64, I, ONE, ZERO};
use rand::Rng;
use std::f64::consts::PI;

/// Largest supported qubit count (configurations are `u64` bitmasks).
pub const MAX_QUBITS: usize = 63;

/// Elementary exact operations every generator expands into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// `exp(θ/2 c_a c_b)`.
    Rotation { a: usize, b: usize, theta: f64 },
    /// The Majorana operator `c_a` itself.
    Majorana(usize),
    /// Multiplication by a unit complex number.
    Phase(C64),
}

/// Pauli-level matchgates with exact phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedGate {
    /// `exp(-iθZ/2)` on `q`.
    Rz { q: usize, theta: f64 },
    /// `exp(-iθ X_q X_{q+1}/2)`.
    RxxNn { q: usize, theta: f64 },
    /// `exp(-iθ Y_q Y_{q+1}/2)`.
    RyyNn { q: usize, theta: f64 },
    /// `exp(-iθ X_q Y_{q+1}/2)`.
    RxyNn { q: usize, theta: f64 },
    /// Pauli X on `q`.
    X(usize),
    /// Pauli Y on `q`.
    Y(usize),
    /// Pauli Z on `q`.
    Z(usize),
    /// Fermionic swap of `q` and `q+1`.
    Fswap(usize),
}

impl NamedGate {
    /// Highest qubit touched.
    pub fn max_qubit(&self) -> usize {
        match *self {
            NamedGate::Rz { q, .. } | NamedGate::X(q) | NamedGate::Y(q) | NamedGate::Z(q) => q,
            NamedGate::RxxNn { q, .. }
            | NamedGate::RyyNn { q, .. }
            | NamedGate::RxyNn { q, .. }
            | NamedGate::Fswap(q) => q + 1,
        }
    }

    /// Same gate with every qubit index shifted by `-by`.
    pub fn shifted_down(&self, by: usize) -> Option<NamedGate> {
        let s = |q: usize| q.checked_sub(by);
        Some(match *self {
            NamedGate::Rz { q, theta } => NamedGate::Rz { q: s(q)?, theta },
            NamedGate::RxxNn { q, theta } => NamedGate::RxxNn { q: s(q)?, theta },
            NamedGate::RyyNn { q, theta } => NamedGate::RyyNn { q: s(q)?, theta },
            NamedGate::RxyNn { q, theta } => NamedGate::RxyNn { q: s(q)?, theta },
            NamedGate::X(q) => NamedGate::X(s(q)?),
            NamedGate::Y(q) => NamedGate::Y(s(q)?),
            NamedGate::Z(q) => NamedGate::Z(s(q)?),
            NamedGate::Fswap(q) => NamedGate::Fswap(s(q)?),
        })
    }

    fn push_z_string(upto: usize, out: &mut Vec<Primitive>) {
        for p in 0..upto {
            out.push(Primitive::Phase(-I));
            out.push(Primitive::Rotation { a: 2 * p, b: 2 * p + 1, theta: PI });
        }
    }

    /// Exact primitive expansion, in application order.
    pub fn primitives(&self) -> Vec<Primitive> {
        let rot = |a, b, theta| Primitive::Rotation { a, b, theta };
        match *self {
            NamedGate::Rz { q, theta } => vec![rot(2 * q, 2 * q + 1, -theta)],
            NamedGate::RxxNn { q, theta } => vec![rot(2 * q + 1, 2 * q + 2, -theta)],
            NamedGate::RyyNn { q, theta } => vec![rot(2 * q, 2 * q + 3, theta)],
            NamedGate::RxyNn { q, theta } => vec![rot(2 * q + 1, 2 * q + 3, -theta)],
            NamedGate::Z(q) => vec![Primitive::Phase(-I), rot(2 * q, 2 * q + 1, PI)],
            NamedGate::X(q) => {
                let mut v = vec![Primitive::Majorana(2 * q)];
                Self::push_z_string(q, &mut v);
                v
            }
            NamedGate::Y(q) => {
                let mut v = vec![Primitive::Majorana(2 * q + 1)];
                Self::push_z_string(q, &mut v);
                v
            }
            NamedGate::Fswap(q) => vec![
                rot(2 * q, 2 * q + 1, PI),
                rot(2 * q, 2 * q + 2, PI / 2.0),
                rot(2 * q + 1, 2 * q + 3, PI / 2.0),
                Primitive::Phase(-I),
            ],
        }
    }
}

/// A Gaussian generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `U_{j,k}(θ) = exp(θ/2 c_j c_k)`.
    Rotation { j: usize, k: usize, theta: f64 },
    /// The single Majorana operator `c_j`.
    Majorana(usize),
    /// A named matchgate.
    Named(NamedGate),
    /// A global phase `e^{iφ}`.
    Phase(f64),
}

impl Generator {
    /// Exact primitive expansion, in application order.
    pub fn primitives(&self) -> Vec<Primitive> {
        match *self {
            Generator::Rotation { j, k, theta } => vec![Primitive::Rotation { a: j, b: k, theta }],
            Generator::Majorana(j) => vec![Primitive::Majorana(j)],
            Generator::Named(g) => g.primitives(),
            Generator::Phase(phi) => vec![Primitive::Phase(C64::from_polar(1.0, phi))],
        }
    }

    /// Checks indices against `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        let m = 2 * n;
        match *self {
            Generator::Rotation { j, k, .. } => {
                if j >= m || k >= m {
                    return invalid(format!("majorana index out of range for n={n}: ({j},{k})"));
                }
                if j == k {
                    return invalid("rotation needs two distinct majorana indices");
                }
            }
            Generator::Majorana(j) => {
                if j >= m {
                    return invalid(format!("majorana index {j} out of range for n={n}"));
                }
            }
            Generator::Named(g) => {
                if g.max_qubit() >= n {
                    return invalid(format!("{g:?} out of range for n={n}"));
                }
            }
            Generator::Phase(_) => {}
        }
        Ok(())
    }
}

/// Orthogonal Heisenberg matrix `R` of a primitive: `U† c_j U = Σ_k R_jk c_k`.
fn primitive_matrix(p: &Primitive, m: usize) -> RMatrix {
    let mut r = RMatrix::identity(m, m);
    match *p {
        Primitive::Rotation { a, b, theta } => {
            let (s, c) = theta.sin_cos();
            r[(a, a)] = c;
            r[(a, b)] = s;
            r[(b, a)] = -s;
            r[(b, b)] = c;
        }
        Primitive::Majorana(a) => {
            for j in 0..m {
                if j != a {
                    r[(j, j)] = -1.0;
                }
            }
        }
        Primitive::Phase(_) => {}
    }
    r
}

/// An ordered list of Gaussian generators on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCircuit {
    /// Qubit count.
    pub n: usize,
    /// Generators in application order.
    pub gates: Vec<Generator>,
    /// Cached orthogonal representation, filled by [`GaussianCircuit::compile`].
    pub compiled_r: Option<RMatrix>,
}

impl GaussianCircuit {
    /// Empty circuit.
    pub fn new(n: usize) -> Self {
        GaussianCircuit { n, gates: Vec::new(), compiled_r: None }
    }

    /// Circuit from a generator list.
    pub fn from_gates(n: usize, gates: Vec<Generator>) -> Self {
        GaussianCircuit { n, gates, compiled_r: None }
    }

    /// Appends a generator (invalidates the compiled matrix).
    pub fn push(&mut self, g: Generator) -> &mut Self {
        self.gates.push(g);
        self.compiled_r = None;
        self
    }

    /// Appends a named gate.
    pub fn named(mut self, g: NamedGate) -> Self {
        self.push(Generator::Named(g));
        self
    }

    /// Appends every generator of `other`.
    pub fn then(mut self, other: &GaussianCircuit) -> Self {
        self.gates.extend_from_slice(&other.gates);
        self.compiled_r = None;
        self
    }

    /// Validates all generator indices.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.validate(self.n)?;
        }
        Ok(())
    }

    /// Product phase and primitive list in application order.
    pub fn primitives(&self) -> Vec<Primitive> {
        self.gates.iter().flat_map(|g| g.primitives()).collect()
    }

    /// Fills `compiled_r` with `R_m ⋯ R_1`, so that `Γ -> R Γ Rᵀ`. Idempotent.
    pub fn compile(&self) -> Result<GaussianCircuit> {
        self.validate()?;
        let m = 2 * self.n;
        let mut r = RMatrix::identity(m, m);
        for p in self.primitives() {
            if let Primitive::Phase(_) = p {
                continue;
            }
            r = primitive_matrix(&p, m) * r;
        }
        Ok(GaussianCircuit { n: self.n, gates: self.gates.clone(), compiled_r: Some(r) })
    }

    /// Random circuit of `len` generators drawn from rotations, single
    /// Majoranas and named matchgates.
    pub fn random<R: Rng + ?Sized>(n: usize, len: usize, rng: &mut R) -> Self {
        let mut c = GaussianCircuit::new(n);
        let m = 2 * n;
        for _ in 0..len {
            let theta = rng.gen_range(-PI..PI);
            let kind = rng.gen_range(0..10);
            let g = match kind {
                0 => Generator::Majorana(rng.gen_range(0..m)),
                1..=5 => {
                    let j = rng.gen_range(0..m);
                    let mut k = rng.gen_range(0..m - 1);
                    if k >= j {
                        k += 1;
                    }
                    Generator::Rotation { j, k, theta }
                }
                _ => {
                    let q = rng.gen_range(0..n);
                    let nn = q + 1 < n;
                    let named = match rng.gen_range(0..8) {
                        0 => NamedGate::Rz { q, theta },
                        1 if nn => NamedGate::RxxNn { q, theta },
                        2 if nn => NamedGate::RyyNn { q, theta },
                        3 if nn => NamedGate::RxyNn { q, theta },
                        4 if nn => NamedGate::Fswap(q),
                        5 => NamedGate::X(q),
                        6 => NamedGate::Y(q),
                        _ => NamedGate::Z(q),
                    };
                    Generator::Named(named)
                }
            };
            c.gates.push(g);
        }
        c
    }
}

/// `c_a |b> = s |b'>`.
pub fn majorana_on_basis(a: usize, b: u64) -> (C64, u64) {
    let j = a / 2;
    let low = (1u64 << j) - 1;
    let sign = if (b & low).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let flipped = b ^ (1u64 << j);
    if a % 2 == 0 {
        (C64::new(sign, 0.0), flipped)
    } else if b >> j & 1 == 0 {
        (C64::new(0.0, sign), flipped)
    } else {
        (C64::new(0.0, -sign), flipped)
    }
}

/// Sign of `W_x |b>` where `W_x = c_{2 j_1} c_{2 j_2} ⋯` over the bits of `x`.
fn frame_sign(x: u64, b: u64) -> f64 {
    let mut parity = 0u32;
    let mut rest = x;
    while rest != 0 {
        let j = rest.trailing_zeros();
        parity += (b & ((1u64 << j) - 1)).count_ones();
        rest &= rest - 1;
    }
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn bits_ascending(mut d: u64) -> Vec<usize> {
    let mut v = Vec::with_capacity(d.count_ones() as usize);
    while d != 0 {
        v.push(d.trailing_zeros() as usize);
        d &= d - 1;
    }
    v
}

/// Thouless matrix of the Gaussian state with covariance `cov` relative to
/// configuration `x` (requires `<x|ψ> != 0`).
fn thouless(cov: &RMatrix, x: u64, n: usize) -> CMatrix {
    let m = 2 * n;
    let flip = |a: usize| a % 2 == 0 && (x >> (a / 2)) & 1 == 1;
    // Q = M P M^{-1} with P = (I - iΓ_f)/2.
    let mut p = CMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            let g = if flip(r) != flip(c) { -cov[(r, c)] } else { cov[(r, c)] };
            let d = if r == c { 0.5 } else { 0.0 };
            p[(r, c)] = C64::new(d, -0.5 * g);
        }
    }
    // Rows of M: u_k = w_{2k} - i w_{2k+1}, v_k = w_{2k} + i w_{2k+1}.
    let mut mp = CMatrix::zeros(m, m);
    for k in 0..n {
        for c in 0..m {
            let e = p[(2 * k, c)];
            let o = p[(2 * k + 1, c)];
            mp[(k, c)] = e - I * o;
            mp[(n + k, c)] = e + I * o;
        }
    }
    // Columns of M^{-1}: w_{2l} = (u_l + v_l)/2, w_{2l+1} = i(u_l - v_l)/2.
    let mut q = CMatrix::zeros(m, m);
    for r in 0..m {
        for l in 0..n {
            let e = mp[(r, 2 * l)];
            let o = mp[(r, 2 * l + 1)];
            q[(r, l)] = 0.5 * e + 0.5 * I * o;
            q[(r, n + l)] = 0.5 * e - 0.5 * I * o;
        }
    }
    let k = q.rows(0, n).into_owned();
    let l = q.rows(n, n).into_owned();
    let kd = k.adjoint();
    let gram = &k * &kd;
    let inv = gram
        .clone()
        .try_inverse()
        .unwrap_or_else(|| gram.pseudo_inverse(1e-300).expect("pseudo-inverse"));
    let z = l * kd * inv;
    let mut za = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            za[(r, c)] = 0.5 * (z[(r, c)] - z[(c, r)]);
        }
    }
    za
}

/// Covariance after projecting qubit `q` onto `outcome` with probability `p > 0`.
pub fn projected_covariance(cov: &RMatrix, q: usize, outcome: u8, p: f64) -> RMatrix {
    let m = cov.nrows();
    let (a, b) = (2 * q, 2 * q + 1);
    let s = if outcome == 0 { 1.0 } else { -1.0 };
    let f = s / (2.0 * p);
    let mut g = cov.clone();
    for k in 0..m {
        if k == a || k == b {
            continue;
        }
        for l in 0..m {
            if l == a || l == b {
                continue;
            }
            g[(k, l)] = cov[(k, l)] + f * (cov[(k, b)] * cov[(l, a)] - cov[(k, a)] * cov[(l, b)]);
        }
    }
    for k in 0..m {
        g[(k, a)] = 0.0;
        g[(a, k)] = 0.0;
        g[(k, b)] = 0.0;
        g[(b, k)] = 0.0;
    }
    g[(a, b)] = s;
    g[(b, a)] = -s;
    g
}

fn prob_zero(cov: &RMatrix, q: usize) -> f64 {
    ((1.0 + cov[(2 * q, 2 * q + 1)]) / 2.0).clamp(0.0, 1.0)
}

/// Most likely configuration chosen qubit by qubit; its probability is at
/// least `2^{-n}`.
fn greedy_configuration(cov: &RMatrix, n: usize) -> u64 {
    let mut g = cov.clone();
    let mut x = 0u64;
    for q in 0..n {
        let p0 = prob_zero(&g, q);
        let (bit, p) = if p0 >= 0.5 { (0u8, p0) } else { (1u8, 1.0 - p0) };
        if bit == 1 {
            x |= 1 << q;
        }
        if q + 1 < n {
            g = projected_covariance(&g, q, bit, p);
        }
    }
    x
}

fn det4(m: RMatrix) -> f64 {
    let d = m.lu().determinant();
    d.abs().sqrt().sqrt()
}

/// `|<φ1|φ2>|` for normalized Gaussian states from their covariances.
pub fn overlap_magnitude(g1: &RMatrix, g2: &RMatrix) -> f64 {
    det4((g1 + g2) * 0.5)
}

/// A pure fermionic Gaussian state with tracked global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n: usize,
    cov: RMatrix,
    amp: C64,
    pivot: u64,
    pivot_mag: f64,
    thouless: CMatrix,
}

impl GaussianState {
    /// `|bits>` with `amp = 1`; `bits[q]` is qubit `q`.
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let n = bits.len();
        if n == 0 {
            return invalid("empty bit-string");
        }
        if n > MAX_QUBITS {
            return Err(Error::ResourceLimit { what: "qubits", requested: n as u128, limit: MAX_QUBITS as u128 });
        }
        let mut x = 0u64;
        for (q, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => x |= 1 << q,
                _ => return invalid(format!("bit {q} is {b}, expected 0 or 1")),
            }
        }
        Ok(Self::basis_mask(n, x))
    }

    /// `|x>` from a bitmask.
    pub fn basis_mask(n: usize, x: u64) -> Self {
        let m = 2 * n;
        let mut cov = RMatrix::zeros(m, m);
        for q in 0..n {
            let s = if x >> q & 1 == 1 { -1.0 } else { 1.0 };
            cov[(2 * q, 2 * q + 1)] = s;
            cov[(2 * q + 1, 2 * q)] = -s;
        }
        GaussianState { n, cov, amp: ONE, pivot: x, pivot_mag: 1.0, thouless: CMatrix::zeros(n, n) }
    }

    /// `|0^n>`.
    pub fn vacuum(n: usize) -> Self {
        Self::basis_mask(n, 0)
    }

    /// Qubit count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Covariance matrix.
    pub fn covariance(&self) -> &RMatrix {
        &self.cov
    }

    /// Global amplitude; `|amp|` is the state norm.
    pub fn amp(&self) -> C64 {
        self.amp
    }

    /// Squared norm `|amp|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.amp.norm_sqr()
    }

    /// `true` for the zero vector produced by a zero-probability projection.
    pub fn is_annihilated(&self) -> bool {
        self.amp == ZERO
    }

    /// Reference configuration of the phase convention.
    pub fn pivot(&self) -> u64 {
        self.pivot
    }

    /// Fermion parity `(-1)^{popcount}` as 0 (even) or 1 (odd).
    pub fn parity(&self) -> u32 {
        self.pivot.count_ones() % 2
    }

    /// Same state times a scalar.
    pub fn scaled(&self, c: C64) -> Self {
        let mut s = self.clone();
        s.amp *= c;
        s
    }

    fn annihilated(&self) -> Self {
        let mut s = self.clone();
        s.amp = ZERO;
        s
    }

    fn with_pivot(n: usize, cov: RMatrix, pivot: u64, value: C64, norm: f64) -> Self {
        // value = <pivot|ψ>, norm = ||ψ||.
        let pivot_mag = (value.norm() / norm).min(1.0);
        let amp = value / pivot_mag;
        let thouless = thouless(&cov, pivot, n);
        GaussianState { n, cov, amp, pivot, pivot_mag, thouless }
    }

    /// Amplitude `<y|ψ>`.
    pub fn amplitude(&self, y: u64) -> C64 {
        if self.is_annihilated() || (y ^ self.pivot).count_ones() % 2 == 1 {
            return ZERO;
        }
        let d = bits_ascending(y ^ self.pivot);
        let pf = if d.is_empty() { ONE } else { pfaffian(&principal(&self.thouless, &d)) };
        let s = frame_sign(self.pivot, y) * frame_sign(self.pivot, self.pivot);
        self.amp * self.pivot_mag * s * pf
    }

    /// Probability of reading 0 on `qubit`.
    pub fn measure_probability(&self, qubit: usize) -> Result<f64> {
        if self.is_annihilated() {
            return Err(Error::InvalidState("annihilated state has no outcome distribution".into()));
        }
        if qubit >= self.n {
            return invalid(format!("qubit {qubit} out of range for n={}", self.n));
        }
        Ok(prob_zero(&self.cov, qubit))
    }

    /// Subnormalized post-measurement state `Π_outcome |ψ>`.
    pub fn project(&self, qubit: usize, outcome: u8) -> Result<Self> {
        if qubit >= self.n {
            return invalid(format!("qubit {qubit} out of range for n={}", self.n));
        }
        if outcome > 1 {
            return invalid(format!("outcome {outcome} is not a bit"));
        }
        if self.is_annihilated() {
            return Ok(self.clone());
        }
        let p0 = prob_zero(&self.cov, qubit);
        let p = if outcome == 0 { p0 } else { 1.0 - p0 };
        if p <= 1e-15 {
            return Ok(self.annihilated());
        }
        let cov = projected_covariance(&self.cov, qubit, outcome, p);
        let norm = self.amp.norm() * p.sqrt();
        let x_bit = (self.pivot >> qubit & 1) as u8;
        let pivot = if x_bit == outcome && self.pivot_mag * self.pivot_mag / p >= pivot_floor(self.n) {
            self.pivot
        } else {
            greedy_configuration(&cov, self.n)
        };
        let value = self.amplitude(pivot);
        if value.norm() == 0.0 {
            return Ok(self.annihilated());
        }
        Ok(Self::with_pivot(self.n, cov, pivot, value, norm))
    }

    /// Applies a generator.
    pub fn evolve(&self, gen: &Generator) -> Result<Self> {
        gen.validate(self.n)?;
        let mut s = self.clone();
        for p in gen.primitives() {
            s = s.apply_primitive(&p);
        }
        Ok(s)
    }

    /// Applies every generator of a circuit.
    pub fn evolve_circuit(&self, circ: &GaussianCircuit) -> Result<Self> {
        if circ.n != self.n {
            return invalid(format!("circuit on {} qubits applied to state on {}", circ.n, self.n));
        }
        circ.validate()?;
        let mut s = self.clone();
        for g in &circ.gates {
            for p in g.primitives() {
                s = s.apply_primitive(&p);
            }
        }
        Ok(s)
    }

    fn apply_primitive(&self, p: &Primitive) -> Self {
        if self.is_annihilated() {
            return self.clone();
        }
        match *p {
            Primitive::Phase(c) => self.scaled(c),
            Primitive::Majorana(a) => self.apply_majorana(a),
            Primitive::Rotation { a, b, theta } => self.apply_rotation(a, b, theta),
        }
    }

    fn apply_majorana(&self, a: usize) -> Self {
        let m = 2 * self.n;
        let mut cov = self.cov.clone();
        for j in 0..m {
            if j != a {
                cov[(a, j)] = -cov[(a, j)];
                cov[(j, a)] = -cov[(j, a)];
            }
        }
        // c_a |x'> = s |x>  =>  <x'|c_a ψ> = conj(s) <x|ψ>.
        let x_new = self.pivot ^ (1u64 << (a / 2));
        let (s, _) = majorana_on_basis(a, x_new);
        let value = s.conj() * self.amp * self.pivot_mag;
        let thouless = thouless(&cov, x_new, self.n);
        GaussianState { n: self.n, cov, amp: value / self.pivot_mag, pivot: x_new, pivot_mag: self.pivot_mag, thouless }
    }

    /// `<y|U ψ>` for `U = cos(θ/2) + sin(θ/2) c_a c_b`.
    fn rotated_amplitude(&self, a: usize, b: usize, c: f64, s: f64, y: u64) -> C64 {
        // c_b c_a |y> = t |y'>  =>  <y| c_a c_b = conj(t) <y'|.
        let (ta, ya) = majorana_on_basis(a, y);
        let (tb, yb) = majorana_on_basis(b, ya);
        let t = ta * tb;
        c * self.amplitude(y) + s * t.conj() * self.amplitude(yb)
    }

    fn apply_rotation(&self, a: usize, b: usize, theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let (s2, c2) = theta.sin_cos();
        let m = 2 * self.n;
        let mut cov = self.cov.clone();
        for j in 0..m {
            let ra = self.cov[(a, j)];
            let rb = self.cov[(b, j)];
            cov[(a, j)] = c2 * ra + s2 * rb;
            cov[(b, j)] = -s2 * ra + c2 * rb;
        }
        let rows = cov.clone();
        for j in 0..m {
            let ca = rows[(j, a)];
            let cb = rows[(j, b)];
            cov[(j, a)] = c2 * ca + s2 * cb;
            cov[(j, b)] = -s2 * ca + c2 * cb;
        }
        let norm = self.amp.norm();
        let x = self.pivot;
        let (_, xa) = majorana_on_basis(a, x);
        let (_, xb) = majorana_on_basis(b, xa);
        let mut best = (x, self.rotated_amplitude(a, b, c, s, x));
        if xb != x {
            let alt = self.rotated_amplitude(a, b, c, s, xb);
            if alt.norm() > best.1.norm() {
                best = (xb, alt);
            }
        }
        let floor = pivot_floor(self.n);
        if (best.1.norm() / norm).powi(2) < floor {
            let y = greedy_configuration(&cov, self.n);
            if y != best.0 {
                let v = self.rotated_amplitude(a, b, c, s, y);
                if v.norm() > best.1.norm() {
                    best = (y, v);
                }
            }
        }
        Self::with_pivot(self.n, cov, best.0, best.1, norm)
    }

    /// Phase-sensitive inner product `<self|other>`.
    pub fn overlap(&self, other: &GaussianState) -> Result<C64> {
        if self.n != other.n {
            return invalid(format!("overlap of states on {} and {} qubits", self.n, other.n));
        }
        if self.is_annihilated() || other.is_annihilated() || self.parity() != other.parity() {
            return Ok(ZERO);
        }
        let n = self.n;
        let floor = 0.25 * 0.5f64.powi(n as i32);
        if self.pivot == other.pivot {
            return Ok(pair_overlap(self, other, self.pivot, &self.thouless, &other.thouless));
        }
        let a_at_x2 = self.amplitude(other.pivot).norm() / self.amp.norm();
        let b_at_x1 = other.amplitude(self.pivot).norm() / other.amp.norm();
        let score2 = a_at_x2 * other.pivot_mag;
        let score1 = b_at_x1 * self.pivot_mag;
        if score2 >= score1 && a_at_x2 * a_at_x2 >= floor {
            let z1 = thouless(&self.cov, other.pivot, n);
            return Ok(pair_overlap(self, other, other.pivot, &z1, &other.thouless));
        }
        if score1 > score2 && b_at_x1 * b_at_x1 >= floor {
            let z2 = thouless(&other.cov, self.pivot, n);
            return Ok(pair_overlap(self, other, self.pivot, &self.thouless, &z2));
        }
        let mag = overlap_magnitude(&self.cov, &other.cov);
        if mag < 1e-14 {
            return Ok(ZERO);
        }
        let y = common_reference(&self.cov, &other.cov, n);
        let z1 = thouless(&self.cov, y, n);
        let z2 = thouless(&other.cov, y, n);
        Ok(pair_overlap(self, other, y, &z1, &z2))
    }
}

fn pivot_floor(n: usize) -> f64 {
    0.5 * 0.5f64.powf(n as f64 / 2.0)
}

/// Overlap through a shared reference configuration `y` with Thouless
/// matrices `z1`, `z2` relative to `y`.
fn pair_overlap(s1: &GaussianState, s2: &GaussianState, y: u64, z1: &CMatrix, z2: &CMatrix) -> C64 {
    let n = s1.n;
    let a1 = s1.amplitude(y);
    let a2 = s2.amplitude(y);
    let mut blk = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            blk[(r, c)] = z1[(r, c)].conj();
            blk[(n + r, n + c)] = -z2[(r, c)];
        }
        blk[(r, n + r)] = ONE;
        blk[(n + r, r)] = -ONE;
    }
    let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    a1.conj() * a2 * sign * pfaffian(&blk)
}

/// Configuration `y` with `|<y|φ1><y|φ2>| >= |<φ1|φ2>| / 2^n`, chosen
/// qubit by qubit from projected covariances.
fn common_reference(g1: &RMatrix, g2: &RMatrix, n: usize) -> u64 {
    let mut g1 = g1.clone();
    let mut g2 = g2.clone();
    let mut y = 0u64;
    for q in 0..n {
        let mut best: Option<(f64, u8, RMatrix, RMatrix)> = None;
        for bit in 0..2u8 {
            let p1 = if bit == 0 { prob_zero(&g1, q) } else { 1.0 - prob_zero(&g1, q) };
            let p2 = if bit == 0 { prob_zero(&g2, q) } else { 1.0 - prob_zero(&g2, q) };
            if p1 <= 1e-300 || p2 <= 1e-300 {
                continue;
            }
            let h1 = projected_covariance(&g1, q, bit, p1);
            let h2 = projected_covariance(&g2, q, bit, p2);
            let score = (p1 * p2).sqrt() * overlap_magnitude(&h1, &h2);
            if best.as_ref().map_or(true, |b| score > b.0) {
                best = Some((score, bit, h1, h2));
            }
        }
        let (_, bit, h1, h2) = best.expect("some outcome has positive probability");
        if bit == 1 {
            y |= 1 << q;
        }
        g1 = h1;
        g2 = h2;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_covariance() {
        let s = GaussianState::basis(&[0, 1]).unwrap();
        assert_eq!(s.covariance()[(0, 1)], 1.0);
        assert_eq!(s.covariance()[(2, 3)], -1.0);
        assert_eq!(s.covariance()[(0, 2)], 0.0);
        assert_eq!(s.amp(), ONE);
        assert!(GaussianState::basis(&[]).is_err());
    }

    #[test]
    fn majorana_action_matches_pauli_strings() {
        // c_0 = X_0: |0> -> |1>; c_1 = Y_0: |0> -> i|1>.
        assert_eq!(majorana_on_basis(0, 0), (ONE, 1));
        assert_eq!(majorana_on_basis(1, 0), (I, 1));
        assert_eq!(majorana_on_basis(1, 1), (-I, 0));
        // c_2 = Z_0 X_1 on |1,0>: sign -1.
        assert_eq!(majorana_on_basis(2, 0b01), (-ONE, 0b11));
    }

    #[test]
    fn compile_single_generators() {
        let c = GaussianCircuit::new(2).compile().unwrap();
        assert_eq!(c.compiled_r.unwrap(), RMatrix::identity(4, 4));
        let mut c = GaussianCircuit::new(2);
        c.push(Generator::Majorana(0));
        let r = c.compile().unwrap().compiled_r.unwrap();
        assert_eq!(r, RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0])));
        let mut c = GaussianCircuit::new(1);
        c.push(Generator::Named(NamedGate::X(3)));
        assert!(c.compile().is_err());
    }

    #[test]
    fn annihilated_projection() {
        let s = GaussianState::vacuum(3);
        let p = s.project(0, 1).unwrap();
        assert!(p.is_annihilated());
        assert!(p.measure_probability(0).is_err());
        let q = s.project(0, 0).unwrap();
        assert_eq!(q.amp(), ONE);
    }
}
