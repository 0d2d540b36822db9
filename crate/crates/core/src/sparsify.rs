//! Random sparsification of Gaussian decompositions, the C̃ statistic and
//! rank selection.

use crate::decomp_channel::AdaptiveBranch;
use crate::decomp_unitary::UnitaryDecomposition;
use crate::error::{invalid, Error, Result};
use crate::exec::ExecPolicy;
use crate::gaussian::{GaussianCircuit, GaussianState};
use crate::linalg::{C64, ZERO};
use crate::oracle::{dense_state_from_gaussian, DenseState};
use crate::rng::keyed;
use rand::Rng;
use std::collections::HashMap;

/// A weighted sum `Σ_m c_m |g_{s(m)}>` of Gaussian states. Terms point into
/// `states`; terms sharing a state index share overlaps.
#[derive(Debug, Clone)]
pub struct SparseSuperposition {
    /// Qubit count.
    pub n: usize,
    /// Distinct Gaussian states.
    pub states: Vec<GaussianState>,
    /// Coefficient and state index per term.
    pub terms: Vec<(C64, usize)>,
}

impl SparseSuperposition {
    /// One term per state.
    pub fn from_pairs(n: usize, pairs: Vec<(C64, GaussianState)>) -> Result<Self> {
        if pairs.is_empty() {
            return invalid("superposition needs at least one term");
        }
        if let Some(bad) = pairs.iter().find(|p| p.1.n() != n) {
            return invalid(format!("term on {} qubits in a {n}-qubit superposition", bad.1.n()));
        }
        let (coeffs, states): (Vec<C64>, Vec<GaussianState>) = pairs.into_iter().unzip();
        let terms = coeffs.into_iter().enumerate().map(|(i, c)| (c, i)).collect();
        Ok(SparseSuperposition { n, states, terms })
    }

    /// Number of terms `k`.
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    /// `Σ |c_m|`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.0.norm()).sum()
    }

    /// Summed coefficient per state.
    pub fn state_weights(&self) -> Vec<C64> {
        let mut w = vec![ZERO; self.states.len()];
        for &(c, s) in &self.terms {
            w[s] += c;
        }
        w
    }

    /// Multiplies every coefficient by `f`.
    pub fn scaled(&self, f: C64) -> Self {
        SparseSuperposition { n: self.n, states: self.states.clone(), terms: self.terms.iter().map(|&(c, s)| (c * f, s)).collect() }
    }

    /// Projects every state onto `outcome` of `qubit` (coefficients unchanged).
    pub fn project(&self, qubit: usize, outcome: u8, policy: ExecPolicy) -> Result<Self> {
        let states = policy.map_slice(&self.states, |s| s.project(qubit, outcome)).into_iter().collect::<Result<Vec<_>>>()?;
        Ok(SparseSuperposition { n: self.n, states, terms: self.terms.clone() })
    }

    /// Applies a Gaussian circuit to every state.
    pub fn evolve(&self, circ: &GaussianCircuit, policy: ExecPolicy) -> Result<Self> {
        let states = policy.map_slice(&self.states, |s| s.evolve_circuit(circ)).into_iter().collect::<Result<Vec<_>>>()?;
        Ok(SparseSuperposition { n: self.n, states, terms: self.terms.clone() })
    }

    /// Dense vector (small `n` only).
    pub fn dense(&self) -> Result<DenseState> {
        let mut out = DenseState::zero(self.n)?;
        out.amps[0] = ZERO;
        for (w, s) in self.state_weights().into_iter().zip(&self.states) {
            if w != ZERO {
                out.add_scaled(w, &dense_state_from_gaussian(s)?);
            }
        }
        Ok(out)
    }
}

fn draw_index(cum: &[f64], u: f64) -> usize {
    let total = *cum.last().expect("non-empty");
    cum.partition_point(|&c| c <= u * total).min(cum.len() - 1)
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    weights
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn unit_phase(c: C64) -> C64 {
    c / c.norm()
}

/// `k` i.i.d. draws `j ~ |c_j|/‖c‖₁`, each term `(‖c‖₁/k)(c_j/|c_j|)|φ_j>`.
pub fn sparsify_state(decomp: &[(C64, GaussianState)], k: usize, seed: u64) -> Result<SparseSuperposition> {
    if decomp.is_empty() {
        return invalid("empty decomposition");
    }
    if k == 0 {
        return invalid("k must be positive");
    }
    let l1: f64 = decomp.iter().map(|d| d.0.norm()).sum();
    if l1 <= 0.0 {
        return invalid("decomposition has zero norm");
    }
    let cum = cumulative(decomp.iter().map(|d| d.0.norm()));
    let scale = l1 / k as f64;
    let n = decomp[0].1.n();
    let terms = (0..k)
        .map(|i| {
            let j = draw_index(&cum, keyed(seed, &[i as u64]).gen());
            (unit_phase(decomp[j].0) * scale, j)
        })
        .collect();
    Ok(SparseSuperposition { n, states: decomp.iter().map(|d| d.1.clone()).collect(), terms })
}

/// `k` sampled Gaussian circuits, as per-gate term choices with phases.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifiedCircuit {
    /// Number of samples.
    pub k: usize,
    /// `choices[i][t]`: term of gate `t` in sample `i`.
    pub choices: Vec<Vec<usize>>,
    /// Accumulated unit phase per sample.
    pub phases: Vec<C64>,
    /// `Π_t ‖c_t‖₁ / k`.
    pub scale: f64,
}

impl SparsifiedCircuit {
    /// Coefficient of sample `i`.
    pub fn coefficient(&self, i: usize) -> C64 {
        self.phases[i] * self.scale
    }

    /// Gaussian circuit of sample `i`.
    pub fn circuit(&self, i: usize, decomps: &[UnitaryDecomposition]) -> GaussianCircuit {
        let n = decomps.first().map_or(0, |d| d.n);
        self.choices[i].iter().zip(decomps).fold(GaussianCircuit::new(n), |c, (&j, d)| c.then(&d.terms[j].1))
    }

    /// Distinct choice rows and the row index of every sample.
    pub fn groups(&self) -> (Vec<usize>, Vec<usize>) {
        let mut seen: HashMap<&[usize], usize> = HashMap::new();
        let mut reps = Vec::new();
        let group = self
            .choices
            .iter()
            .enumerate()
            .map(|(i, row)| {
                *seen.entry(row.as_slice()).or_insert_with(|| {
                    reps.push(i);
                    reps.len() - 1
                })
            })
            .collect();
        (reps, group)
    }

    /// Evolves `initial` under every sample; samples with equal choices keep
    /// one stored state so overlaps are computed once per pattern.
    pub fn evolve(&self, decomps: &[UnitaryDecomposition], initial: &GaussianState, policy: ExecPolicy) -> Result<SparseSuperposition> {
        let (reps, group) = self.groups();
        let mut evolved = policy
            .map_range(self.k, |i| initial.evolve_circuit(&self.circuit(i, decomps)).map(Some))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let states = reps.iter().map(|&i| evolved[i].take().expect("representative evolved")).collect();
        let terms = group.into_iter().enumerate().map(|(i, g)| (self.coefficient(i), g)).collect();
        Ok(SparseSuperposition { n: initial.n(), states, terms })
    }
}

fn gate_tables(decomps: &[UnitaryDecomposition]) -> Result<Vec<Vec<f64>>> {
    decomps
        .iter()
        .enumerate()
        .map(|(t, d)| {
            if d.terms.is_empty() {
                return Err(Error::InvalidArgument(format!("decomposition {t} has no terms")));
            }
            Ok(cumulative(d.terms.iter().map(|x| x.0.norm())))
        })
        .collect()
}

/// Per-gate term draws `j ~ |c_{t,j}|/‖c_t‖₁` for `k` samples, keyed by
/// `(seed, i, t)`.
pub fn sparsify_circuit(decomps: &[UnitaryDecomposition], k: usize, seed: u64) -> Result<SparsifiedCircuit> {
    if k == 0 {
        return invalid("k must be positive");
    }
    let tables = gate_tables(decomps)?;
    let scale = decomps.iter().map(|d| d.l1_norm).product::<f64>() / k as f64;
    let mut choices = Vec::with_capacity(k);
    let mut phases = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(decomps.len());
        let mut ph = C64::new(1.0, 0.0);
        for (t, (d, cum)) in decomps.iter().zip(&tables).enumerate() {
            let j = draw_index(cum, keyed(seed, &[i as u64, t as u64]).gen());
            ph *= unit_phase(d.terms[j].0);
            row.push(j);
        }
        choices.push(row);
        phases.push(ph);
    }
    Ok(SparsifiedCircuit { k, choices, phases, scale })
}

/// Element of an interleaved circuit with measure-and-feed-forward steps.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptiveElement {
    /// A decomposed unitary.
    Unitary(UnitaryDecomposition),
    /// An adaptive Kraus channel (weight ignored).
    Kraus(AdaptiveBranch),
}

/// A sparsified pattern for the unitary elements of an adaptive circuit,
/// shared by every measurement trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifiedKrausPattern {
    /// Gate choices for the unitary elements in order.
    pub pattern: SparsifiedCircuit,
    /// For each element, its index among the unitary elements, or `None` for Kraus steps.
    pub skeleton: Vec<Option<usize>>,
}

impl SparsifiedKrausPattern {
    /// `‖c‖₁/k`.
    pub fn global_scale(&self) -> f64 {
        self.pattern.scale
    }

    /// Sparse state after following Kraus outcomes `outcomes` (one per Kraus
    /// step, as indices into its Kraus list).
    pub fn apply(&self, elements: &[AdaptiveElement], initial: &GaussianState, outcomes: &[usize], policy: ExecPolicy) -> Result<SparseSuperposition> {
        let unitary: Vec<UnitaryDecomposition> = elements
            .iter()
            .filter_map(|e| if let AdaptiveElement::Unitary(u) = e { Some(u.clone()) } else { None })
            .collect();
        let (reps, group) = self.pattern.groups();
        let states = policy
            .map_slice(&reps, |&i| {
                let mut s = initial.clone();
                let mut y = outcomes.iter();
                for (e, slot) in elements.iter().zip(&self.skeleton) {
                    match (e, slot) {
                        (AdaptiveElement::Unitary(_), Some(t)) => {
                            s = s.evolve_circuit(&unitary[*t].terms[self.pattern.choices[i][*t]].1)?;
                        }
                        (AdaptiveElement::Kraus(b), None) => {
                            let idx = *y.next().ok_or_else(|| Error::InvalidArgument("too few Kraus outcomes".into()))?;
                            let kr = b.kraus.get(idx).ok_or_else(|| Error::InvalidArgument(format!("Kraus index {idx} out of range")))?;
                            s = s.project(kr.qubit, kr.outcome)?.evolve_circuit(&kr.then)?;
                        }
                        _ => return invalid("skeleton does not match elements"),
                    }
                }
                Ok(s)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let terms = group.into_iter().enumerate().map(|(i, g)| (self.pattern.coefficient(i), g)).collect();
        Ok(SparseSuperposition { n: initial.n(), states, terms })
    }
}

/// Samples the unitary gate pattern once; Kraus steps are left to the caller.
pub fn sparsify_adaptive(elements: &[AdaptiveElement], k: usize, seed: u64) -> Result<SparsifiedKrausPattern> {
    let mut skeleton = Vec::with_capacity(elements.len());
    let mut unitary = Vec::new();
    for e in elements {
        match e {
            AdaptiveElement::Unitary(u) => {
                skeleton.push(Some(unitary.len()));
                unitary.push(u.clone());
            }
            AdaptiveElement::Kraus(b) => {
                if b.kraus.is_empty() {
                    return invalid("adaptive step without Kraus operators");
                }
                skeleton.push(None);
            }
        }
    }
    Ok(SparsifiedKrausPattern { pattern: sparsify_circuit(&unitary, k, seed)?, skeleton })
}

/// `C̃ = ‖c‖₁ Σ_j |c_j| |<ψ|φ_j>|²` with `ψ` the normalized sum of the decomposition.
pub fn c_tilde(decomp: &[(C64, GaussianState)]) -> Result<f64> {
    if decomp.is_empty() {
        return invalid("empty decomposition");
    }
    let m = decomp.len();
    let mut gram = vec![ZERO; m * m];
    for i in 0..m {
        for j in i..m {
            let o = decomp[i].1.overlap(&decomp[j].1)?;
            gram[i * m + j] = o;
            gram[j * m + i] = o.conj();
        }
    }
    let amp: Vec<C64> = (0..m).map(|j| (0..m).map(|i| decomp[i].0.conj() * gram[i * m + j]).sum()).collect();
    let norm_sqr: f64 = (0..m).map(|j| (amp[j] * decomp[j].0).re).sum();
    if norm_sqr <= 0.0 {
        return invalid("decomposition sums to the zero vector");
    }
    let l1: f64 = decomp.iter().map(|d| d.0.norm()).sum();
    Ok(l1 * decomp.iter().zip(&amp).map(|(d, a)| d.0.norm() * a.norm_sqr()).sum::<f64>() / norm_sqr)
}

/// `C̃` against an explicit dense target `ψ` (normalized internally).
pub fn c_tilde_dense(decomp: &[(C64, GaussianState)], psi: &DenseState) -> Result<f64> {
    let nrm = psi.norm_sqr();
    if nrm <= 0.0 {
        return invalid("zero target state");
    }
    let l1: f64 = decomp.iter().map(|d| d.0.norm()).sum();
    let mut s = 0.0;
    for (c, g) in decomp {
        s += c.norm() * psi.inner(&dense_state_from_gaussian(g)?).norm_sqr();
    }
    Ok(l1 * s / nrm)
}

/// Adaptive `C̃ = ‖c‖₁ Σ_w |c_w| |Σ_m <ψ_m|φ_{m,w}>|²`; `branches[w][m]` is
/// term `w` along measurement trajectory `m`, `psi[m]` the exact trajectory state.
pub fn c_tilde_adaptive(coeffs: &[C64], branches: &[Vec<DenseState>], psi: &[DenseState]) -> Result<f64> {
    if coeffs.len() != branches.len() {
        return invalid("one trajectory list per coefficient");
    }
    let l1: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let mut s = 0.0;
    for (c, traj) in coeffs.iter().zip(branches) {
        if traj.len() != psi.len() {
            return invalid("trajectory count mismatch");
        }
        let o: C64 = psi.iter().zip(traj).map(|(p, f)| p.inner(f)).sum();
        s += c.norm() * o.norm_sqr();
    }
    Ok(l1 * s)
}

/// Critical precision `δ_c = 8(C̃ − 1)/‖c‖₁²`.
pub fn critical_precision(c_tilde: f64, l1sq: f64) -> f64 {
    8.0 * (c_tilde - 1.0) / l1sq
}

/// Sparsification rank: the sub-critical formula
/// `4‖c‖₁²((C̃−1)/(δ‖c‖₁²) + 1/δ) + 1` when `δ ≤ δ_c`, else `⌈4E/δ⌉`.
pub fn choose_rank(cost: f64, delta: f64, c_tilde: Option<f64>, l1sq: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return invalid(format!("precision must be positive, got {delta}"));
    }
    if let Some(ct) = c_tilde {
        if delta <= critical_precision(ct, l1sq) {
            let k = 4.0 * l1sq * ((ct - 1.0) / (delta * l1sq) + 1.0 / delta);
            return Ok(k.ceil() as usize + 1);
        }
    }
    Ok((4.0 * cost / delta - 1e-9).ceil().max(1.0) as usize)
}

/// `E(Tr Ω) = 1 + (‖c‖₁² − 1)/k` for a normalized target.
pub fn expected_trace(l1sq: f64, k: usize) -> f64 {
    1.0 + (l1sq - 1.0) / k as f64
}

/// Finite-`k` variance bound on `Tr Ω`:
/// `4(1/k − 3/k² + 2/k³) C̃ + 2‖c‖₁⁴(1/k² − 1/k³) − (4/k − 10/k² + 6/k³)`.
pub fn variance_bound(c_tilde: f64, l1sq: f64, k: usize) -> f64 {
    let k = k as f64;
    let (k1, k2, k3) = (1.0 / k, 1.0 / (k * k), 1.0 / (k * k * k));
    4.0 * (k1 - 3.0 * k2 + 2.0 * k3) * c_tilde + 2.0 * l1sq * l1sq * (k2 - k3) - (4.0 * k1 - 10.0 * k2 + 6.0 * k3)
}

/// Ensemble-distance bound `2‖c‖₁²/k + √Var`.
pub fn ensemble_bound(l1sq: f64, k: usize, variance: f64) -> f64 {
    2.0 * l1sq / k as f64 + variance.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(choose_rank(2.0, 0.1, None, 2.0).unwrap(), 80);
        assert_eq!(choose_rank(2.0, 0.1, Some(1.0), 2.0).unwrap(), 80);
        assert_eq!(choose_rank(4.0, 0.01, Some(1.5), 4.0).unwrap(), 1801);
        assert!(choose_rank(1.0, 0.0, None, 1.0).is_err());
    }

    #[test]
    fn single_term_copies() {
        let s = GaussianState::basis(&[0, 1]).unwrap();
        let sp = sparsify_state(&[(C64::new(0.0, 2.0), s.clone())], 5, 1).unwrap();
        assert_eq!(sp.k(), 5);
        let d = sp.dense().unwrap();
        assert!((d.amps[1] - C64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(sparsify_state(&[], 3, 1).is_err());
    }

    #[test]
    fn variance_bound_leading_terms() {
        let (c, l, k) = (1.3, 2.0, 1_000_000usize);
        let kf = k as f64;
        let lead = 4.0 * (c - 1.0) / kf + 2.0 * (l / kf).powi(2) + (10.0 - 12.0 * c) / (kf * kf);
        assert!((variance_bound(c, l, k) - lead).abs() < 1e-15);
    }
}
