//! Bit-string samplers: exact expansion, sparsified approximation and the
//! adaptive measure-and-feed-forward variant.

use crate::decomp_channel::{dense_gate, AdaptiveBranch, Branch, ChannelSpec, DecompositionOracle, OracleEntry};
use crate::decomp_unitary::{gate_decomposition, UnitaryDecomposition};
use crate::error::{invalid, Error, Result};
use crate::exec::ExecPolicy;
use crate::gates::Gate;
use crate::gaussian::{GaussianState, MAX_QUBITS};
use crate::linalg::{CMatrix, C64};
use crate::norm::{NormMethod, DEFAULT_FLOOR};
use crate::oracle::born_distribution;
use crate::rng::keyed;
use crate::sparsify::{choose_rank, sparsify_adaptive, sparsify_circuit, AdaptiveElement, SparseSuperposition};
use rand::Rng;
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// Largest qubit count for the dense reference distribution.
pub const DENSE_REFERENCE_LIMIT: usize = 10;

/// Probabilities within this distance of 0 or 1 are snapped.
const PROB_GUARD: f64 = 1e-12;

/// One step of a circuit program.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// A gate (Gaussian or not).
    Gate(Gate),
    /// A noisy channel, adaptive or not.
    Channel(ChannelSpec),
    /// Terminal measurement of the listed qubits, in output order.
    Measure(Vec<usize>),
}

/// A sequence of gates and channels on `n` qubits starting from `|0ⁿ>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProgram {
    /// Qubit count.
    pub n: usize,
    /// Elements in time order.
    pub elements: Vec<Element>,
}

impl CircuitProgram {
    /// Validated program.
    pub fn new(n: usize, elements: Vec<Element>) -> Result<Self> {
        let p = CircuitProgram { n, elements };
        p.validate()?;
        Ok(p)
    }

    /// Checks qubit ranges and measurement placement; errors name the element index.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return invalid(format!("qubit count {} outside 1..={MAX_QUBITS}", self.n));
        }
        let last = self.elements.len().saturating_sub(1);
        for (i, e) in self.elements.iter().enumerate() {
            let r = match e {
                Element::Gate(g) => g.validate(self.n),
                Element::Channel(c) => c.validate(self.n),
                Element::Measure(qs) => check_qubit_list(qs, self.n).and_then(|_| {
                    if i == last {
                        Ok(())
                    } else {
                        invalid("measurement must be the last element")
                    }
                }),
            };
            r.map_err(|err| Error::InvalidArgument(format!("element {i}: {}", strip(&err))))?;
        }
        Ok(())
    }

    /// Measured qubits: the terminal list, or every qubit.
    pub fn measured(&self) -> Vec<usize> {
        match self.elements.last() {
            Some(Element::Measure(qs)) => qs.clone(),
            _ => (0..self.n).collect(),
        }
    }

    /// `true` if some channel uses measure-and-feed-forward branches.
    pub fn has_adaptive(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Channel(c) if c.is_adaptive()))
    }

    /// Registers every gate and channel with a decomposition oracle.
    pub fn compile(&self) -> Result<CompiledProgram> {
        self.validate()?;
        let mut oracle = DecompositionOracle::new();
        let mut ids = Vec::new();
        for (i, e) in self.elements.iter().enumerate() {
            let at = |err: Error| Error::InvalidArgument(format!("element {i}: {}", strip(&err)));
            match e {
                Element::Gate(g) => ids.push(oracle.register(OracleEntry::Gate(gate_decomposition(g, self.n).map_err(at)?))),
                Element::Channel(c) => ids.push(oracle.register(OracleEntry::Channel(c.decompose(self.n).map_err(at)?))),
                Element::Measure(_) => {}
            }
        }
        Ok(CompiledProgram { n: self.n, oracle, ids })
    }

    /// Density matrix of the output state on the dense oracle.
    pub fn dense_output(&self) -> Result<CMatrix> {
        self.validate()?;
        if self.n > DENSE_REFERENCE_LIMIT {
            return Err(Error::ResourceLimit { what: "dense reference qubits", requested: self.n as u128, limit: DENSE_REFERENCE_LIMIT as u128 });
        }
        let dim = 1 << self.n;
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        for e in &self.elements {
            match e {
                Element::Gate(g) => {
                    let u = dense_gate(g, self.n)?;
                    rho = &u * rho * u.adjoint();
                }
                Element::Channel(c) => rho = c.defining_channel(self.n)?.apply(&rho),
                Element::Measure(_) => {}
            }
        }
        Ok(rho)
    }

    /// Exact outcome distribution of `qubits` (first qubit most significant).
    pub fn dense_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        check_qubit_list(qubits, self.n)?;
        Ok(born_distribution(&self.dense_output()?, self.n, qubits))
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::InvalidArgument(m) | Error::InvalidState(m) => m.clone(),
        other => other.to_string(),
    }
}

fn check_qubit_list(qs: &[usize], n: usize) -> Result<()> {
    if qs.is_empty() {
        return invalid("empty qubit list");
    }
    for (i, &q) in qs.iter().enumerate() {
        if q >= n {
            return invalid(format!("qubit {q} out of range for n={n}"));
        }
        if qs[..i].contains(&q) {
            return invalid(format!("qubit {q} listed twice"));
        }
    }
    Ok(())
}

/// A program with its oracle descriptors.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    /// Qubit count.
    pub n: usize,
    /// Registered decompositions.
    pub oracle: DecompositionOracle,
    /// Oracle descriptor per non-measurement element.
    pub ids: Vec<usize>,
}

/// A drawn trajectory: one branch per element.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Chosen branch index per element.
    pub choice: Vec<usize>,
    /// Chosen branches.
    pub branches: Vec<Branch>,
    /// `Π ‖c‖₁²` over the unitary branches.
    pub cost: f64,
}

impl Trajectory {
    /// Unitary decompositions in order; `None` if a branch is adaptive.
    pub fn unitaries(&self) -> Option<Vec<UnitaryDecomposition>> {
        self.branches
            .iter()
            .map(|b| if let Branch::Unitary { decomp, .. } = b { Some(decomp.clone()) } else { None })
            .collect()
    }

    fn elements(&self) -> Vec<AdaptiveElement> {
        self.branches
            .iter()
            .map(|b| match b {
                Branch::Unitary { decomp, .. } => AdaptiveElement::Unitary(decomp.clone()),
                Branch::Adaptive(a) => AdaptiveElement::Kraus(a.clone()),
            })
            .collect()
    }

    fn single_term(&self) -> bool {
        self.branches.iter().all(|b| !matches!(b, Branch::Unitary { decomp, .. } if decomp.terms.len() > 1))
    }
}

impl CompiledProgram {
    /// Trajectory for `(seed, draw)`.
    pub fn trajectory(&self, seed: u64, draw: u64) -> Result<Trajectory> {
        let mut choice = Vec::with_capacity(self.ids.len());
        let mut branches = Vec::with_capacity(self.ids.len());
        let mut cost = 1.0;
        for &id in &self.ids {
            let i = self.oracle.sample_index(id, seed, draw)?;
            let b = self.oracle.get(id)?.branches[i].clone();
            if let Branch::Unitary { decomp, .. } = &b {
                cost *= decomp.l1_squared();
            }
            choice.push(i);
            branches.push(b);
        }
        Ok(Trajectory { choice, branches, cost })
    }

    /// `Π_t` of the per-element channel costs.
    pub fn total_cost(&self) -> Result<f64> {
        self.ids.iter().map(|&id| self.oracle.cost(id)).product()
    }
}

/// Full outer-product expansion of `Π_t (Σ_j c_{t,j} G_{t,j}) |initial>`.
pub fn evolve_circuit(decomps: &[UnitaryDecomposition], initial: &GaussianState, budget: usize, policy: ExecPolicy) -> Result<SparseSuperposition> {
    let mut rank: u128 = 1;
    for d in decomps {
        if d.terms.is_empty() {
            return invalid("decomposition with no terms");
        }
        rank = rank.saturating_mul(d.terms.len() as u128);
        if rank > budget as u128 {
            return Err(Error::ResourceLimit { what: "superposition rank", requested: rank, limit: budget as u128 });
        }
    }
    let mut terms: Vec<(C64, GaussianState)> = vec![(C64::new(1.0, 0.0), initial.clone())];
    for d in decomps {
        let next = policy.map_range(terms.len() * d.terms.len(), |idx| {
            let (c, s) = &terms[idx / d.terms.len()];
            let (cj, g) = &d.terms[idx % d.terms.len()];
            s.evolve_circuit(g).map(|s2| (*c * *cj, s2))
        });
        terms = next.into_iter().collect::<Result<Vec<_>>>()?;
    }
    SparseSuperposition::from_pairs(initial.n(), terms)
}

/// Sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Number of bit strings.
    pub shots: usize,
    /// Master seed.
    pub seed: u64,
    /// Measured qubits; defaults to the program's measurement.
    pub qubits: Option<Vec<usize>>,
    /// Sparsification precision `δ`.
    pub delta: f64,
    /// Norm-estimation error `ε`.
    pub epsilon: f64,
    /// Failure probability per norm estimate.
    pub p_fail: f64,
    /// Shots drawn from one trajectory and sparsification.
    pub shots_per_draw: usize,
    /// Maximum superposition rank.
    pub rank_budget: usize,
    /// Rank up to which adaptive outcome probabilities use exact norms.
    pub exact_rank_threshold: usize,
    /// Norm floor for the fast estimator.
    pub norm_floor: f64,
    /// Execution policy.
    pub policy: ExecPolicy,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            shots: 1,
            seed: 0,
            qubits: None,
            delta: 0.1 / 3.0,
            epsilon: 0.2 / 3.0,
            p_fail: 0.01,
            shots_per_draw: 1,
            rank_budget: 1 << 20,
            exact_rank_threshold: 4096,
            norm_floor: DEFAULT_FLOOR,
            policy: ExecPolicy::default(),
        }
    }
}

impl SamplerConfig {
    /// Splits a total budget `δ′` into `δ = δ′/3`, `ε = 2δ′/3`.
    pub fn with_budget(mut self, total: f64) -> Self {
        self.delta = total / 3.0;
        self.epsilon = 2.0 * total / 3.0;
        self
    }

    fn check(&self, approximate: bool) -> Result<()> {
        if self.shots == 0 {
            return invalid("shots must be positive");
        }
        if self.shots_per_draw == 0 {
            return invalid("shots_per_draw must be positive");
        }
        if approximate {
            if !(self.delta > 0.0) {
                return invalid(format!("delta must be positive, got {}", self.delta));
            }
            if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
                return invalid(format!("epsilon must lie in (0,1), got {}", self.epsilon));
            }
            if !(self.p_fail > 0.0 && self.p_fail < 1.0) {
                return invalid(format!("p_fail must lie in (0,1), got {}", self.p_fail));
            }
        }
        Ok(())
    }

    fn fast(&self) -> NormMethod {
        NormMethod::Fast { epsilon: self.epsilon, p_fail: self.p_fail, floor: self.norm_floor }
    }
}

/// Sampling mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Exact expansion and exact norms.
    Exact,
    /// Sparsification and fast norms.
    Approx,
    /// Sparsification with measure-and-feed-forward branches.
    Adaptive,
}

/// One emitted bit string.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    /// Outcome per measured qubit.
    pub bits: Vec<u8>,
    /// Conditional probability used for each emitted bit.
    pub probabilities: Vec<f64>,
    /// Outcome probabilities of the adaptive steps on this draw.
    pub adaptive_probabilities: Vec<f64>,
    /// Superposition rank.
    pub k: usize,
    /// Trajectory cost `E`.
    pub cost: f64,
    /// Trajectory draw index.
    pub draw: u64,
}

/// A batch of shots.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    /// Mode used.
    pub mode: Mode,
    /// Measured qubits.
    pub qubits: Vec<usize>,
    /// Per-shot reports in shot order.
    pub reports: Vec<SampleReport>,
    /// Wall time.
    pub elapsed: Duration,
}

impl SampleRun {
    /// Empirical distribution over `2^w` outcomes (first qubit most significant).
    pub fn histogram(&self) -> Vec<f64> {
        let mut h = vec![0.0; 1 << self.qubits.len()];
        for r in &self.reports {
            h[r.bits.iter().fold(0usize, |a, &b| (a << 1) | b as usize)] += 1.0;
        }
        let total = self.reports.len().max(1) as f64;
        h.iter_mut().for_each(|x| *x /= total);
        h
    }
}

/// Total variation distance `½ Σ |p − q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Child seed for the stream keyed by `path`.
pub fn derived_seed(seed: u64, path: &[u64]) -> u64 {
    keyed(seed, path).gen()
}

fn prefix_key(prefix: &[u8]) -> u64 {
    prefix.iter().fold(1u64, |a, &b| (a << 1) | b as u64)
}

fn snap(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p < PROB_GUARD {
        0.0
    } else if p > 1.0 - PROB_GUARD {
        1.0
    } else {
        p
    }
}

/// `Pr(qubit = 0)` relative to `norm`, estimating the complement when above ½.
fn prob_zero(sup: &SparseSuperposition, qubit: usize, norm: f64, method: NormMethod, seed: u64, policy: ExecPolicy) -> Result<f64> {
    if norm <= 0.0 {
        return Err(Error::InvalidState("superposition has zero estimated norm".into()));
    }
    let p0 = method.eval(&sup.project(qubit, 0, policy)?, derived_seed(seed, &[0]), policy)? / norm;
    if p0 <= 0.5 || method == NormMethod::Exact {
        return Ok(snap(p0));
    }
    let p1 = method.eval(&sup.project(qubit, 1, policy)?, derived_seed(seed, &[1]), policy)? / norm;
    Ok(snap(1.0 - p1))
}

/// Cache of projected superpositions keyed by measured prefix.
struct Trie<'a> {
    qubits: &'a [usize],
    method: NormMethod,
    policy: ExecPolicy,
    seed: u64,
    norm: f64,
    nodes: HashMap<Vec<u8>, (SparseSuperposition, Option<f64>)>,
}

impl<'a> Trie<'a> {
    fn new(root: SparseSuperposition, qubits: &'a [usize], method: NormMethod, seed: u64, policy: ExecPolicy) -> Result<Self> {
        let norm = method.eval(&root, derived_seed(seed, &[0x5007]), policy)?;
        let mut nodes = HashMap::new();
        nodes.insert(Vec::new(), (root, None));
        Ok(Trie { qubits, method, policy, seed, norm, nodes })
    }

    fn shot<R: Rng>(&mut self, rng: &mut R) -> Result<(Vec<u8>, Vec<f64>)> {
        let mut prefix = Vec::with_capacity(self.qubits.len());
        let mut probs = Vec::with_capacity(self.qubits.len());
        for (depth, &q) in self.qubits.iter().enumerate() {
            let node = self.nodes.get(&prefix).expect("parent cached");
            let p0 = match node.1 {
                Some(p) => p,
                None => {
                    let p = prob_zero(&node.0, q, self.norm, self.method, derived_seed(self.seed, &[prefix_key(&prefix)]), self.policy)?;
                    self.nodes.get_mut(&prefix).expect("parent cached").1 = Some(p);
                    p
                }
            };
            let b = u8::from(rng.gen::<f64>() >= p0);
            let pb = if b == 0 { p0 } else { 1.0 - p0 };
            probs.push(pb);
            let parent = prefix.clone();
            prefix.push(b);
            if depth + 1 < self.qubits.len() && !self.nodes.contains_key(&prefix) {
                let sup = self.nodes[&parent].0.project(q, b, self.policy)?.scaled(C64::new(1.0 / pb.sqrt(), 0.0));
                self.nodes.insert(prefix.clone(), (sup, None));
            }
        }
        Ok((prefix, probs))
    }
}

fn resolve_qubits(program: &CircuitProgram, cfg: &SamplerConfig) -> Result<Vec<usize>> {
    let q = cfg.qubits.clone().unwrap_or_else(|| program.measured());
    check_qubit_list(&q, program.n)?;
    Ok(q)
}

fn rank_for(traj: &Trajectory, cfg: &SamplerConfig) -> Result<usize> {
    let k = if traj.single_term() { 1 } else { choose_rank(traj.cost, cfg.delta, None, traj.cost)? };
    if k > cfg.rank_budget {
        return Err(Error::ResourceLimit { what: "sparsification rank", requested: k as u128, limit: cfg.rank_budget as u128 });
    }
    Ok(k)
}

/// Samples with exact expansion of each drawn trajectory and exact norm ratios.
pub fn sample_exact(program: &CircuitProgram, cfg: &SamplerConfig) -> Result<SampleRun> {
    cfg.check(false)?;
    if program.has_adaptive() {
        return invalid("exact sampling does not support adaptive channels");
    }
    let start = Instant::now();
    let qubits = resolve_qubits(program, cfg)?;
    let compiled = program.compile()?;
    let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut trajs = Vec::new();
    for shot in 0..cfg.shots {
        let t = compiled.trajectory(cfg.seed, shot as u64)?;
        groups.entry(t.choice.clone()).or_default().push(shot);
        trajs.push(t);
    }
    let mut keys: Vec<&Vec<usize>> = groups.keys().collect();
    keys.sort();
    let initial = GaussianState::vacuum(program.n);
    let per_group = cfg.policy.map_slice(&keys, |key| -> Result<Vec<(usize, SampleReport)>> {
        let shots = &groups[*key];
        let traj = &trajs[shots[0]];
        let decomps = traj.unitaries().expect("no adaptive branches");
        let sup = evolve_circuit(&decomps, &initial, cfg.rank_budget, cfg.policy)?;
        let k = sup.k();
        let mut trie = Trie::new(sup, &qubits, NormMethod::Exact, cfg.seed, cfg.policy)?;
        let mut out = Vec::with_capacity(shots.len());
        for &s in shots {
            let mut rng = keyed(cfg.seed, &[0x5407, s as u64]);
            let (bits, probabilities) = trie.shot(&mut rng)?;
            out.push((s, SampleReport { bits, probabilities, adaptive_probabilities: Vec::new(), k, cost: traj.cost, draw: s as u64 }));
        }
        Ok(out)
    });
    finish(Mode::Exact, qubits, per_group, cfg.shots, start)
}

fn finish(mode: Mode, qubits: Vec<usize>, parts: Vec<Result<Vec<(usize, SampleReport)>>>, shots: usize, start: Instant) -> Result<SampleRun> {
    let mut slots: Vec<Option<SampleReport>> = vec![None; shots];
    for part in parts {
        for (s, r) in part? {
            slots[s] = Some(r);
        }
    }
    let reports = slots.into_iter().map(|r| r.expect("every shot sampled")).collect();
    Ok(SampleRun { mode, qubits, reports, elapsed: start.elapsed() })
}

fn draws(cfg: &SamplerConfig) -> usize {
    cfg.shots.div_ceil(cfg.shots_per_draw)
}

fn shots_of_draw(cfg: &SamplerConfig, d: usize) -> std::ops::Range<usize> {
    d * cfg.shots_per_draw..((d + 1) * cfg.shots_per_draw).min(cfg.shots)
}

fn emit(trie: &mut Trie, cfg: &SamplerConfig, d: usize, k: usize, cost: f64, adaptive: &[f64]) -> Result<Vec<(usize, SampleReport)>> {
    shots_of_draw(cfg, d)
        .map(|s| {
            let mut rng = keyed(cfg.seed, &[0x5407, s as u64]);
            let (bits, probabilities) = trie.shot(&mut rng)?;
            Ok((s, SampleReport { bits, probabilities, adaptive_probabilities: adaptive.to_vec(), k, cost, draw: d as u64 }))
        })
        .collect()
}

/// Samples with `k = ⌈4E/δ⌉` sparsification and fast-norm conditional probabilities.
pub fn sample_approx(program: &CircuitProgram, cfg: &SamplerConfig) -> Result<SampleRun> {
    cfg.check(true)?;
    if program.has_adaptive() {
        return invalid("approximate sampling does not support adaptive channels; use the adaptive sampler");
    }
    let start = Instant::now();
    let qubits = resolve_qubits(program, cfg)?;
    let compiled = program.compile()?;
    let initial = GaussianState::vacuum(program.n);
    let parts = cfg.policy.map_range(draws(cfg), |d| -> Result<Vec<(usize, SampleReport)>> {
        let traj = compiled.trajectory(cfg.seed, d as u64)?;
        let decomps = traj.unitaries().expect("no adaptive branches");
        let k = rank_for(&traj, cfg)?;
        let pattern = sparsify_circuit(&decomps, k, derived_seed(cfg.seed, &[0x5a, d as u64]))?;
        let sup = pattern.evolve(&decomps, &initial, cfg.policy)?;
        let mut trie = Trie::new(sup, &qubits, cfg.fast(), derived_seed(cfg.seed, &[0x7e, d as u64]), cfg.policy)?;
        emit(&mut trie, cfg, d, k, traj.cost, &[])
    });
    finish(Mode::Approx, qubits, parts, cfg.shots, start)
}

/// Applies an adaptive step: draws a Kraus outcome and returns the
/// renormalized superposition with the outcome probability.
fn kraus_step(sup: &SparseSuperposition, branch: &AdaptiveBranch, method: NormMethod, seed: u64, u: f64, policy: ExecPolicy) -> Result<(SparseSuperposition, f64)> {
    let norm = method.eval(sup, derived_seed(seed, &[0x4e]), policy)?;
    if norm <= 0.0 {
        return Err(Error::InvalidState("superposition has zero estimated norm".into()));
    }
    let kr = &branch.kraus;
    let binary = kr.len() == 2 && kr[0].qubit == kr[1].qubit && kr[0].outcome != kr[1].outcome;
    let probs: Vec<f64> = if binary {
        let p0 = prob_zero(sup, kr[0].qubit, norm, method, derived_seed(seed, &[0x9b]), policy)?;
        if kr[0].outcome == 0 {
            vec![p0, 1.0 - p0]
        } else {
            vec![1.0 - p0, p0]
        }
    } else {
        let raw = kr
            .iter()
            .enumerate()
            .map(|(i, k)| Ok(method.eval(&sup.project(k.qubit, k.outcome, policy)?, derived_seed(seed, &[0x9c, i as u64]), policy)? / norm))
            .collect::<Result<Vec<f64>>>()?;
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|p| snap(p / total)).collect()
    };
    let mut acc = 0.0;
    let mut y = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            y = i;
            break;
        }
    }
    let p = probs[y];
    let out = sup.project(kr[y].qubit, kr[y].outcome, policy)?.evolve(&kr[y].then, policy)?.scaled(C64::new(1.0 / p.sqrt(), 0.0));
    Ok((out, p))
}

/// Samples circuits with adaptive channels: Kraus outcomes are drawn on the fly
/// from norm ratios of the sparsified superposition.
pub fn sample_adaptive(program: &CircuitProgram, cfg: &SamplerConfig) -> Result<SampleRun> {
    cfg.check(true)?;
    let start = Instant::now();
    let qubits = resolve_qubits(program, cfg)?;
    let compiled = program.compile()?;
    let initial = GaussianState::vacuum(program.n);
    let parts = cfg.policy.map_range(draws(cfg), |d| -> Result<Vec<(usize, SampleReport)>> {
        let traj = compiled.trajectory(cfg.seed, d as u64)?;
        let k = rank_for(&traj, cfg)?;
        let method = if k <= cfg.exact_rank_threshold { NormMethod::Exact } else { cfg.fast() };
        let elements = traj.elements();
        let pattern = sparsify_adaptive(&elements, k, derived_seed(cfg.seed, &[0x5a, d as u64]))?;
        let (reps, group) = pattern.pattern.groups();
        let mut states: Vec<GaussianState> = vec![initial.clone(); reps.len()];
        let mut factor = C64::new(1.0, 0.0);
        let mut adaptive = Vec::new();
        let current = |states: &[GaussianState], factor: C64| SparseSuperposition {
            n: program.n,
            states: states.to_vec(),
            terms: group.iter().enumerate().map(|(i, &g)| (pattern.pattern.coefficient(i) * factor, g)).collect(),
        };
        for (step, (e, slot)) in elements.iter().zip(&pattern.skeleton).enumerate() {
            match (e, slot) {
                (AdaptiveElement::Unitary(u), Some(t)) => {
                    states = cfg
                        .policy
                        .map_range(reps.len(), |g| states[g].evolve_circuit(&u.terms[pattern.pattern.choices[reps[g]][*t]].1))
                        .into_iter()
                        .collect::<Result<Vec<_>>>()?;
                }
                (AdaptiveElement::Kraus(b), None) => {
                    let sup = current(&states, factor);
                    let u: f64 = keyed(cfg.seed, &[0xad, d as u64, step as u64]).gen();
                    let (next, p) = kraus_step(&sup, b, method, derived_seed(cfg.seed, &[0xae, d as u64, step as u64]), u, cfg.policy)?;
                    factor /= p.sqrt();
                    states = next.states;
                    adaptive.push(p);
                }
                _ => return invalid("trajectory skeleton mismatch"),
            }
        }
        let sup = current(&states, factor);
        let mut trie = Trie::new(sup, &qubits, method, derived_seed(cfg.seed, &[0x7e, d as u64]), cfg.policy)?;
        emit(&mut trie, cfg, d, k, traj.cost, &adaptive)
    });
    finish(Mode::Adaptive, qubits, parts, cfg.shots, start)
}

/// Dispatches on `mode`.
pub fn sample(program: &CircuitProgram, mode: Mode, cfg: &SamplerConfig) -> Result<SampleRun> {
    match mode {
        Mode::Exact => sample_exact(program, cfg),
        Mode::Approx => sample_approx(program, cfg),
        Mode::Adaptive => sample_adaptive(program, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp_unitary::{optimal_unitary_decomposition, CatalogGate};
    use crate::oracle::DenseState;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn two_rzz_rank_four() {
        let d = optimal_unitary_decomposition(CatalogGate::Rzz, Some(FRAC_PI_2), &[0, 1], 2).unwrap();
        let sup = evolve_circuit(&[d.clone(), d.clone()], &GaussianState::vacuum(2), 16, ExecPolicy::Sequential).unwrap();
        assert_eq!(sup.k(), 4);
        let dense = sup.dense().unwrap();
        let g = Gate::Rzz { q0: 0, q1: 1, theta: FRAC_PI_2 };
        let want = crate::oracle::dense_apply_circuit(&DenseState::zero(2).unwrap(), &[g.clone(), g]).unwrap();
        assert!(dense.max_diff(&want) < 1e-10, "{:?} vs {:?}", dense.amps, want.amps);
        let err = evolve_circuit(&[d.clone(), d.clone(), d], &GaussianState::vacuum(2), 4, ExecPolicy::Sequential).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { requested: 8, .. }));
    }

    #[test]
    fn validation_names_element() {
        let p = CircuitProgram { n: 2, elements: vec![Element::Gate(Gate::Rzz { q0: 0, q1: 5, theta: 1.0 })] };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("element 0"), "{msg}");
        let p = CircuitProgram { n: 2, elements: vec![Element::Measure(vec![0]), Element::Gate(Gate::X(0))] };
        assert!(p.validate().unwrap_err().to_string().contains("element 0"));
    }

    #[test]
    fn gaussian_circuit_is_deterministic_bit() {
        let p = CircuitProgram::new(2, vec![Element::Gate(Gate::X(1))]).unwrap();
        let cfg = SamplerConfig { shots: 20, ..Default::default() };
        for run in [sample_exact(&p, &cfg).unwrap(), sample_approx(&p, &cfg).unwrap(), sample_adaptive(&p, &cfg).unwrap()] {
            assert!(run.reports.iter().all(|r| r.bits == vec![0, 1] && r.k == 1));
        }
    }
}
