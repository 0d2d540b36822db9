//! Numeric certificates: witness evaluations, sandwich bounds and the
//! Z-twirl trace check.

use crate::decomp_channel::ChannelDecomposition;
use crate::error::{invalid, Result};
use crate::exec::ExecPolicy;
use crate::gaussian::{GaussianCircuit, GaussianState};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};
use crate::oracle::{dense_state_from_gaussian, dual_at_identity, transfer_matrix, DenseChannel, DenseOperator, DenseState};
use crate::rng::keyed;
use std::f64::consts::FRAC_1_SQRT_2;

/// Slack allowed on the Gaussian-overlap constraint.
pub const WITNESS_TOL: f64 = 1e-9;

/// Outcome of a sampled witness check. Validity is evidence from random
/// Gaussian states, not a proof.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// Witness label.
    pub id: String,
    /// `true` if no sampled `|<ω|φ>|` exceeded `1 + WITNESS_TOL`.
    pub valid: bool,
    /// Largest sampled `|<ω|φ>|`.
    pub max_gaussian_overlap: f64,
    /// Number of violations.
    pub violations: usize,
    /// Gaussian states sampled.
    pub samples: usize,
    /// `|<ω|ψ>|²`.
    pub value: f64,
    /// Bound the value is compared against.
    pub claimed: f64,
}

/// Random Gaussian state from a depth-`10n` random circuit on `|0ⁿ>`.
pub fn random_gaussian_state(n: usize, seed: u64, index: u64) -> Result<GaussianState> {
    let mut rng = keyed(seed, &[0x9a55, index]);
    GaussianState::vacuum(n).evolve_circuit(&GaussianCircuit::random(n, 10 * n, &mut rng))
}

/// Largest `|<ω|φ>|` and violation count over sampled Gaussian `φ`.
pub fn sampled_gaussian_overlaps(omega: &DenseState, samples: usize, seed: u64, policy: ExecPolicy) -> Result<(f64, usize)> {
    let vals = policy.map_range(samples, |i| -> Result<f64> {
        let g = random_gaussian_state(omega.n, seed, i as u64)?;
        Ok(omega.inner(&dense_state_from_gaussian(&g)?).norm())
    });
    let mut max = 0.0f64;
    let mut bad = 0;
    for v in vals {
        let v = v?;
        max = max.max(v);
        bad += usize::from(v > 1.0 + WITNESS_TOL);
    }
    Ok((max, bad))
}

/// Checks `|<ω|φ>| ≤ 1` on sampled Gaussian states and evaluates `|<ω|ψ>|²`.
pub fn extent_witness_check(id: &str, omega: &DenseState, target: &DenseState, claimed: f64, samples: usize, seed: u64, policy: ExecPolicy) -> Result<WitnessReport> {
    if omega.n > 10 || omega.n != target.n {
        return invalid(format!("witness on {} qubits, target on {}", omega.n, target.n));
    }
    let (max, violations) = sampled_gaussian_overlaps(omega, samples, seed, policy)?;
    Ok(WitnessReport {
        id: id.to_string(),
        valid: violations == 0,
        max_gaussian_overlap: max,
        violations,
        samples,
        value: omega.inner(target).norm_sqr(),
        claimed,
    })
}

/// `tr[Wρ]` for Hermitian `W`.
pub fn dyadic_witness_value(w: &DenseOperator, rho: &DenseOperator) -> Result<f64> {
    if w.mat.shape() != rho.mat.shape() {
        return invalid("witness and state dimensions differ");
    }
    if crate::linalg::max_abs_diff(&w.mat, &w.mat.adjoint()) > 1e-12 {
        return invalid("witness is not Hermitian");
    }
    Ok((&w.mat * &rho.mat).trace().re)
}

/// `|0> + sign|1>` (unnormalized).
pub fn qubit_witness_vector(sign: f64) -> DenseState {
    DenseState { n: 1, amps: vec![ONE, C64::new(sign.signum(), 0.0)] }
}

/// `(|0000> + |1111> + sign·i(|0011> + |1100>))/√2`.
pub fn pair_witness_vector(sign: f64) -> DenseState {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let s = I * sign.signum() * FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; 16];
    amps[0b0000] = h;
    amps[0b1111] = h;
    amps[0b0011] = s;
    amps[0b1100] = s;
    DenseState { n: 4, amps }
}

/// Projector `|w><w|` as a witness operator.
pub fn witness_operator(w: &DenseState) -> DenseOperator {
    DenseOperator { n: w.n, mat: w.projector() }
}

/// Both signed witnesses for 1- or 2-qubit channels (2-qubit ones act on
/// the Choi state).
pub fn standard_witnesses(channel_qubits: usize) -> Result<Vec<DenseOperator>> {
    match channel_qubits {
        1 => Ok([1.0, -1.0].iter().map(|&s| witness_operator(&qubit_witness_vector(s))).collect()),
        2 => Ok([1.0, -1.0].iter().map(|&s| witness_operator(&pair_witness_vector(s))).collect()),
        k => invalid(format!("no standard witnesses for {k}-qubit channels")),
    }
}

/// Two ends of the sandwich inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    /// Best witness value on the channel output (at least 1).
    pub lower: f64,
    /// Decomposition cost.
    pub upper: f64,
    /// `lower ≤ upper + 1e-9`.
    pub consistent: bool,
}

/// Lower bound from witnesses on `E(|g><g|)` with the channel on `targets`;
/// upper bound from the decomposition cost.
pub fn sandwich_bounds(channel: &ChannelDecomposition, input: &GaussianState, targets: &[usize], witnesses: &[DenseOperator]) -> Result<SandwichReport> {
    if targets.len() != channel.n {
        return invalid(format!("{} targets for a {}-qubit channel", targets.len(), channel.n));
    }
    let psi = dense_state_from_gaussian(input)?;
    let rho = channel.to_dense()?.embedded(input.n(), targets)?.apply(&psi.projector());
    let out = DenseOperator { n: input.n(), mat: rho };
    let mut lower = 1.0f64;
    for w in witnesses {
        lower = lower.max(dyadic_witness_value(w, &out)?);
    }
    let upper = channel.cost;
    Ok(SandwichReport { lower, upper, consistent: lower <= upper + 1e-9 })
}

/// Bell pairs `|ψ+>^{⊗2}` as a Gaussian state.
pub fn bell_pair_input() -> Result<GaussianState> {
    GaussianState::vacuum(4).evolve_circuit(&crate::decomp_unitary::bell_pair_prep())
}

/// Z-twirl outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwirlReport {
    /// `U` is diagonal up to 1e-12.
    pub is_diagonal: bool,
    /// `max |T'*(I) − I|` for the twirled transfer matrix `T'`.
    pub defect: f64,
}

/// Twirls the transfer matrix of `U` over all Z-strings and measures how far
/// the dual at the identity is from `I`.
pub fn z_twirl_trace_check(u: &CMatrix) -> Result<TwirlReport> {
    let dim = u.nrows();
    if u.ncols() != dim || !dim.is_power_of_two() || dim > 8 {
        return invalid("expects a square unitary on at most 3 qubits");
    }
    let n = dim.trailing_zeros() as usize;
    let t = transfer_matrix(&DenseChannel { n, ops: vec![(1.0, u.clone())] });
    let big = dim * dim;
    let strings = 1usize << (2 * n);
    let sign = |x: usize, idx: usize| if (x & idx).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    let mut tw = CMatrix::zeros(big, big);
    for x in 0..strings {
        for r in 0..big {
            let sr = sign(x, r);
            for c in 0..big {
                tw[(r, c)] += t[(r, c)] * (sr * sign(x, c));
            }
        }
    }
    tw /= C64::new(strings as f64, 0.0);
    let dual = dual_at_identity(&tw, n);
    let defect = crate::linalg::max_abs_diff(&dual, &CMatrix::identity(dim, dim));
    let off = (0..dim).flat_map(|r| (0..dim).filter(move |&c| c != r).map(move |c| (r, c))).map(|(r, c)| u[(r, c)].norm()).fold(0.0, f64::max);
    Ok(TwirlReport { is_diagonal: off < 1e-12, defect })
}

/// `(max over {|e_t>, |o_t>} of |<·|+^t>|², max over sampled Gaussian states)`.
pub fn plus_state_fidelity(t: usize, samples: usize, seed: u64, policy: ExecPolicy) -> Result<(f64, f64)> {
    let dim = 1usize << t;
    let plus = DenseState { n: t, amps: vec![C64::new((dim as f64).sqrt().recip(), 0.0); dim] };
    let part = |parity: u32| {
        let amps: Vec<C64> = (0..dim).map(|i| if i.count_ones() % 2 == parity { ONE } else { ZERO }).collect();
        let nrm = (amps.iter().filter(|a| **a != ZERO).count() as f64).sqrt();
        DenseState { n: t, amps: amps.into_iter().map(|a| a / nrm).collect() }
    };
    let candidates = part(0).inner(&plus).norm_sqr().max(part(1).inner(&plus).norm_sqr());
    let (max, _) = sampled_gaussian_overlaps(&plus, samples, seed, policy)?;
    Ok((candidates, max * max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{Gate, pauli_rotation, pauli_x};
    use std::f64::consts::PI;

    #[test]
    fn ry_witness_value() {
        for &theta in &[0.0, 0.4, PI / 2.0, 2.5, PI] {
            let psi = crate::oracle::apply_local(&DenseState::zero(1).unwrap(), &[0], &Gate::Ry { q: 0, theta }.local_matrix()).unwrap();
            let r = extent_witness_check("ry", &qubit_witness_vector(1.0), &psi, 1.0 + theta.sin(), 200, 1, ExecPolicy::Sequential).unwrap();
            assert!(r.valid);
            assert!((r.value - r.claimed).abs() < 1e-12);
        }
    }

    #[test]
    fn twirl_examples() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, C64::from_polar(1.0, 0.3), C64::from_polar(1.0, 1.1), C64::from_polar(1.0, -2.0)]));
        let r = z_twirl_trace_check(&d).unwrap();
        assert!(r.is_diagonal && r.defect < 1e-12);
        let swap = Gate::Swap { q0: 0, q1: 1 }.local_matrix();
        assert!(z_twirl_trace_check(&swap).unwrap().defect > 1e-3);
        let rx = pauli_rotation(&pauli_x(), 0.7);
        let r = z_twirl_trace_check(&rx).unwrap();
        assert!(!r.is_diagonal && r.defect > 1e-3);
    }

    #[test]
    fn identity_witness() {
        let rho = DenseOperator { n: 1, mat: DenseState::zero(1).unwrap().projector() };
        let w = DenseOperator { n: 1, mat: CMatrix::identity(2, 2) };
        assert!((dyadic_witness_value(&w, &rho).unwrap() - 1.0).abs() < 1e-15);
        let bad = DenseOperator { n: 1, mat: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]) };
        assert!(dyadic_witness_value(&bad, &rho).is_err());
    }
}
