//! Exact and Monte Carlo squared norms of Gaussian superpositions.

use crate::error::{invalid, Result};
use crate::exec::ExecPolicy;
use crate::linalg::{C64, ZERO};
use crate::rng::keyed;
use crate::sparsify::SparseSuperposition;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use std::collections::{BTreeSet, HashMap};

/// Default norm floor below which only an additive guarantee holds.
pub const DEFAULT_FLOOR: f64 = 1e-6;

/// Pilot draws used to size batches.
const PILOT: usize = 64;

/// Distinct-state count up to which every overlap row is precomputed.
const FULL_ROWS: usize = 512;

/// Cap on total estimator draws.
const MAX_SAMPLES: u64 = 1 << 28;

/// Result of [`fast_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    /// Estimated `‖Ψ‖²`.
    pub value: f64,
    /// Requested multiplicative error.
    pub epsilon: f64,
    /// Requested failure probability.
    pub p_fail: f64,
    /// Estimator draws consumed.
    pub samples_used: u64,
    /// Set when the norm is below the floor, so only an additive bound holds.
    pub additive_only: bool,
}

/// Row `s` of the weighted Gram matrix: `<g_s|Ψ> = Σ_t w_t <g_s|g_t>`.
fn overlap_row(sup: &SparseSuperposition, weights: &[C64], s: usize) -> Result<C64> {
    let mut acc = ZERO;
    for (t, w) in weights.iter().enumerate() {
        if *w != ZERO {
            acc += *w * sup.states[s].overlap(&sup.states[t])?;
        }
    }
    Ok(acc)
}

/// `Σ_{a,b} c̄_a c_b <g_a|g_b>`, aggregated over shared states.
pub fn exact_norm(sup: &SparseSuperposition, policy: ExecPolicy) -> Result<f64> {
    if sup.terms.is_empty() {
        return invalid("superposition has no terms");
    }
    let w = sup.state_weights();
    let rows = policy.map_range(sup.states.len(), |s| if w[s] == ZERO { Ok(ZERO) } else { overlap_row(sup, &w, s) });
    let mut total = ZERO;
    for (ws, r) in w.iter().zip(rows) {
        total += ws.conj() * r?;
    }
    let scale: f64 = w.iter().map(|x| x.norm()).sum::<f64>().powi(2).max(1.0);
    debug_assert!(total.im.abs() <= 1e-9 * scale, "imaginary residue {}", total.im);
    Ok(total.re.max(0.0))
}

/// Batch size `⌈4V̂/(ε² f²)⌉` for variance proxy `V̂` and norm floor `f`.
pub fn batch_size(variance_proxy: f64, epsilon: f64, floor: f64) -> u64 {
    (4.0 * variance_proxy / (epsilon * epsilon * floor * floor)).ceil().max(1.0) as u64
}

/// Odd number of batch means `⌈8 ln(1/p_fail)⌉`.
pub fn batch_count(p_fail: f64) -> u64 {
    let m = (8.0 * (1.0 / p_fail).ln()).ceil().max(1.0) as u64;
    m | 1
}

struct Sampler<'a> {
    term_cum: Vec<f64>,
    l1: f64,
    sup: &'a SparseSuperposition,
}

impl Sampler<'_> {
    fn draw(&self, u: f64) -> usize {
        let x = u * self.l1;
        self.term_cum.partition_point(|&c| c <= x).min(self.term_cum.len() - 1)
    }

    fn value(&self, term: usize, rows: &[Option<C64>]) -> f64 {
        let (c, s) = self.sup.terms[term];
        let r = rows[s].expect("row computed");
        self.l1 * (c.conj() / c.norm() * r).re
    }
}

/// Distinct estimator outcomes `(probability, y)`, merging terms with equal
/// state and coefficient.
fn value_table(sampler: &Sampler, rows: &[Option<C64>]) -> Vec<(f64, f64)> {
    let mut index: HashMap<(usize, u64, u64), usize> = HashMap::new();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, &(c, s)) in sampler.sup.terms.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let p = c.norm() / sampler.l1;
        let slot = *index.entry((s, c.re.to_bits(), c.im.to_bits())).or_insert_with(|| {
            out.push((0.0, sampler.value(a, rows)));
            out.len() - 1
        });
        out[slot].0 += p;
    }
    out
}

/// Mean of `batch` draws from `values`, via sequential binomial counts.
fn multinomial_mean<R: Rng>(values: &[(f64, f64)], batch: u64, rng: &mut R) -> f64 {
    let mut left = batch;
    let mut mass = 1.0;
    let mut sum = 0.0;
    for (i, &(p, y)) in values.iter().enumerate() {
        if left == 0 {
            break;
        }
        let count = if i + 1 == values.len() || p >= mass {
            left
        } else {
            Binomial::new(left, (p / mass).clamp(0.0, 1.0)).expect("valid binomial").sample(rng)
        };
        sum += count as f64 * y;
        left -= count;
        mass -= p;
    }
    sum / batch as f64
}

/// Median-of-means estimate of `‖Ψ‖²` from draws
/// `y = ‖c‖₁ Re[(c̄_a/|c_a|) <g_a|Ψ>]`, `a ~ |c_a|/‖c‖₁`.
pub fn fast_norm(sup: &SparseSuperposition, epsilon: f64, p_fail: f64, seed: u64, floor: f64, policy: ExecPolicy) -> Result<NormEstimate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon must lie in (0,1), got {epsilon}"));
    }
    if !(p_fail > 0.0 && p_fail < 1.0) {
        return invalid(format!("p_fail must lie in (0,1), got {p_fail}"));
    }
    if !(floor > 0.0) {
        return invalid(format!("norm floor must be positive, got {floor}"));
    }
    if sup.terms.is_empty() {
        return invalid("superposition has no terms");
    }
    let nonzero: Vec<usize> = (0..sup.terms.len()).filter(|&i| sup.terms[i].0 != ZERO).collect();
    if nonzero.is_empty() {
        return Ok(NormEstimate { value: 0.0, epsilon, p_fail, samples_used: 0, additive_only: true });
    }
    let mut term_cum = Vec::with_capacity(sup.terms.len());
    let mut acc = 0.0;
    for t in &sup.terms {
        acc += t.0.norm();
        term_cum.push(acc);
    }
    let sampler = Sampler { term_cum, l1: acc, sup };
    let weights = sup.state_weights();
    let mut rows: Vec<Option<C64>> = vec![None; sup.states.len()];
    let fill = |rows: &mut Vec<Option<C64>>, need: BTreeSet<usize>| -> Result<()> {
        let need: Vec<usize> = need.into_iter().filter(|&s| rows[s].is_none()).collect();
        let vals = policy.map_slice(&need, |&s| overlap_row(sup, &weights, s));
        for (s, v) in need.into_iter().zip(vals) {
            rows[s] = Some(v?);
        }
        Ok(())
    };

    let mut pilot_rng = keyed(seed, &[0x9110]);
    let pilot: Vec<usize> = (0..PILOT).map(|_| sampler.draw(pilot_rng.gen())).collect();
    let mut need: BTreeSet<usize> = pilot.iter().map(|&a| sup.terms[a].1).collect();
    if sup.states.len() <= FULL_ROWS {
        need.extend(0..sup.states.len());
    }
    fill(&mut rows, need)?;
    let pilot_mean = pilot.iter().map(|&a| sampler.value(a, &rows)).sum::<f64>() / PILOT as f64;
    let max_row = rows.iter().flatten().map(|r| r.norm_sqr()).fold(0.0, f64::max);
    let variance_proxy = sampler.l1 * sampler.l1 * max_row;
    let floor_eff = floor.max(pilot_mean / 2.0);
    let m = batch_count(p_fail);
    let batch = batch_size(variance_proxy, epsilon, floor_eff).min(MAX_SAMPLES / m).max(1);

    let table = if rows.iter().all(Option::is_some) { Some(value_table(&sampler, &rows)) } else { None };
    let mut means: Vec<f64> = match table {
        Some(values) if (values.len() as u64) * 16 < batch => policy.map_range(m as usize, |b| multinomial_mean(&values, batch, &mut keyed(seed, &[0xba7c, b as u64]))),
        _ => {
            let batch_rng = |b: usize| keyed(seed, &[0xba7c, b as u64]);
            let needed = policy.map_range(m as usize, |b| {
                let mut rng = batch_rng(b);
                (0..batch).map(|_| sup.terms[sampler.draw(rng.gen())].1).collect::<BTreeSet<usize>>()
            });
            fill(&mut rows, needed.into_iter().flatten().collect())?;
            policy.map_range(m as usize, |b| {
                let mut rng = batch_rng(b);
                (0..batch).map(|_| sampler.value(sampler.draw(rng.gen()), &rows)).sum::<f64>() / batch as f64
            })
        }
    };
    means.sort_by(f64::total_cmp);
    let value = means[means.len() / 2].max(0.0);
    Ok(NormEstimate { value, epsilon, p_fail, samples_used: PILOT as u64 + m * batch, additive_only: value < floor })
}

/// Norm evaluation rule used by the samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMethod {
    /// [`exact_norm`].
    Exact,
    /// [`fast_norm`] with the given parameters.
    Fast {
        /// Multiplicative error.
        epsilon: f64,
        /// Failure probability.
        p_fail: f64,
        /// Norm floor.
        floor: f64,
    },
}

impl NormMethod {
    /// Evaluates `‖Ψ‖²` with this rule.
    pub fn eval(&self, sup: &SparseSuperposition, seed: u64, policy: ExecPolicy) -> Result<f64> {
        match *self {
            NormMethod::Exact => exact_norm(sup, policy),
            NormMethod::Fast { epsilon, p_fail, floor } => Ok(fast_norm(sup, epsilon, p_fail, seed, floor, policy)?.value),
        }
    }
}
