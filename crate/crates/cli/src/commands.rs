//! Subcommand implementations. Each returns one JSON document.

use crate::error::CliError;
use crate::schema::parse_circuit_file;
use fgsim::decomp_channel::{Branch, OptimalFlag};
use fgsim::decomp_unitary::{optimal_unitary_decomposition, CatalogGate, UnitaryDecomposition};
use fgsim::gaussian::NamedGate;
use fgsim::norm::{exact_norm, fast_norm, DEFAULT_FLOOR};
use fgsim::sampler::evolve_circuit;
use fgsim::sparsify::{c_tilde, ensemble_bound, expected_trace, sparsify_circuit, variance_bound};
use fgsim::{CircuitProgram, Element, ExecPolicy, GaussianCircuit, GaussianState, Generator, Mode, SampleRun, SamplerConfig, SparseSuperposition};
use serde_json::{json, Value};
use std::path::Path;

/// Exact-expansion rank above which `sparsify-report` skips the C̃ computation.
const C_TILDE_RANK_LIMIT: usize = 4096;

/// Reads and validates a circuit file.
pub fn load_circuit(path: &Path) -> Result<CircuitProgram, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(parse_circuit_file(&text)?.1)
}

fn complex(c: fgsim::C64) -> Value {
    json!([c.re, c.im])
}

fn named_json(g: &NamedGate) -> Value {
    match *g {
        NamedGate::Rz { q, theta } => json!({ "id": "rz", "targets": [q], "theta": theta }),
        NamedGate::RxxNn { q, theta } => json!({ "id": "rxx_nn", "targets": [q, q + 1], "theta": theta }),
        NamedGate::RyyNn { q, theta } => json!({ "id": "ryy_nn", "targets": [q, q + 1], "theta": theta }),
        NamedGate::RxyNn { q, theta } => json!({ "id": "rxy_nn", "targets": [q, q + 1], "theta": theta }),
        NamedGate::X(q) => json!({ "id": "x", "targets": [q] }),
        NamedGate::Y(q) => json!({ "id": "y", "targets": [q] }),
        NamedGate::Z(q) => json!({ "id": "z", "targets": [q] }),
        NamedGate::Fswap(q) => json!({ "id": "fswap", "targets": [q, q + 1] }),
    }
}

fn circuit_json(c: &GaussianCircuit) -> Value {
    Value::Array(
        c.gates
            .iter()
            .map(|g| match g {
                Generator::Rotation { j, k, theta } => json!({ "rotation": { "j": j, "k": k, "theta": theta } }),
                Generator::Majorana(j) => json!({ "majorana": j }),
                Generator::Named(n) => json!({ "gate": named_json(n) }),
                Generator::Phase(phi) => json!({ "phase": phi }),
            })
            .collect(),
    )
}

fn decomposition_json(d: &UnitaryDecomposition) -> Value {
    json!({
        "terms": d.terms.iter().map(|(c, circ)| json!({ "coefficient": complex(*c), "circuit": circuit_json(circ) })).collect::<Vec<_>>(),
        "l1_norm": d.l1_norm,
        "cost": d.l1_squared(),
        "extent": d.extent_claim,
        "optimal": d.optimal,
    })
}

/// `decompose --gate <id> [--theta r]`.
pub fn decompose(gate: &str, theta: Option<f64>) -> Result<Value, CliError> {
    let cg = CatalogGate::parse(gate)?;
    let qubits: &[usize] = match cg {
        CatalogGate::Rzz | CatalogGate::Cphase | CatalogGate::SwapNn => &[0, 1],
        _ => &[0],
    };
    let d = optimal_unitary_decomposition(cg, theta, qubits, qubits.len())?;
    let mut out = decomposition_json(&d);
    out["gate"] = json!(gate);
    out["theta"] = json!(theta);
    out["n"] = json!(d.n);
    Ok(out)
}

fn flag_name(f: OptimalFlag) -> &'static str {
    match f {
        OptimalFlag::ExtentOptimal => "extent_optimal",
        OptimalFlag::AugmentedFeasible => "augmented_feasible",
        OptimalFlag::Feasible => "feasible",
    }
}

/// `extent --circuit <path>`: per-element cost and their product.
pub fn extent(program: &CircuitProgram) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    let mut product = 1.0;
    for (i, e) in program.elements.iter().enumerate() {
        let row = match e {
            Element::Gate(g) => {
                let d = fgsim::decomp_unitary::gate_decomposition(g, program.n)?;
                json!({ "index": i, "type": "gate", "id": g.id(), "cost": d.l1_squared(), "extent": d.extent_claim, "optimal": d.optimal, "rank": d.rank() })
            }
            Element::Channel(c) => {
                let d = c.decompose(program.n)?;
                let adaptive = d.branches.iter().filter(|b| matches!(b, Branch::Adaptive(_))).count();
                json!({
                    "index": i, "type": "channel", "cost": d.cost, "equimagical": d.equimagical,
                    "optimality": flag_name(d.optimal_flag), "branches": d.branches.len(), "adaptive_branches": adaptive,
                })
            }
            Element::Measure(_) => continue,
        };
        product *= row["cost"].as_f64().unwrap_or(1.0);
        rows.push(row);
    }
    Ok(json!({ "n": program.n, "elements": rows, "total_cost": product }))
}

/// Sampling options taken from the command line.
#[derive(Debug, Clone)]
pub struct SampleOptions {
    pub shots: usize,
    pub mode: Mode,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_fail: f64,
    pub seed: u64,
    pub qubits: Option<Vec<usize>>,
    pub shots_per_draw: usize,
    pub rank_budget: usize,
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn run_json(run: &SampleRun, opts: &SampleOptions) -> Value {
    let mut counts = std::collections::BTreeMap::new();
    for r in &run.reports {
        *counts.entry(bit_string(&r.bits)).or_insert(0usize) += 1;
    }
    let mode = match run.mode {
        Mode::Exact => "exact",
        Mode::Approx => "approx",
        Mode::Adaptive => "adaptive",
    };
    json!({
        "mode": mode,
        "seed": opts.seed,
        "shots": run.reports.len(),
        "qubits": run.qubits,
        "counts": counts,
        "samples": run.reports.iter().map(|r| json!({
            "bits": bit_string(&r.bits),
            "probabilities": r.probabilities,
            "adaptive_probabilities": r.adaptive_probabilities,
            "k": r.k,
            "cost": r.cost,
            "draw": r.draw,
        })).collect::<Vec<_>>(),
        "elapsed_seconds": run.elapsed.as_secs_f64(),
    })
}

/// `sample --circuit <path> ...`.
pub fn sample(program: &CircuitProgram, opts: &SampleOptions) -> Result<Value, CliError> {
    let mut cfg = SamplerConfig {
        shots: opts.shots,
        seed: opts.seed,
        qubits: opts.qubits.clone(),
        p_fail: opts.p_fail,
        shots_per_draw: opts.shots_per_draw,
        rank_budget: opts.rank_budget,
        ..Default::default()
    };
    if let Some(d) = opts.delta {
        cfg.delta = d;
    }
    if let Some(e) = opts.epsilon {
        cfg.epsilon = e;
    }
    let run = fgsim::sampler::sample(program, opts.mode, &cfg)?;
    Ok(run_json(&run, opts))
}

fn unitary_trajectory(program: &CircuitProgram, seed: u64) -> Result<Vec<UnitaryDecomposition>, CliError> {
    program
        .compile()?
        .trajectory(seed, 0)?
        .unitaries()
        .ok_or_else(|| CliError::Validation("adaptive channels have no fixed output superposition".into()))
}

/// Norm options taken from the command line.
#[derive(Debug, Clone)]
pub struct NormOptions {
    pub fast: bool,
    pub epsilon: f64,
    pub p_fail: f64,
    pub seed: u64,
    pub k: Option<usize>,
    pub rank_budget: usize,
}

/// `norm --circuit <path> --mode exact|fast`: squared norm of the output
/// superposition, optionally after sparsifying to rank `k`.
pub fn norm(program: &CircuitProgram, opts: &NormOptions) -> Result<Value, CliError> {
    let decomps = unitary_trajectory(program, opts.seed)?;
    let vacuum = GaussianState::vacuum(program.n);
    let sup: SparseSuperposition = match opts.k {
        Some(k) => sparsify_circuit(&decomps, k, opts.seed)?.evolve(&decomps, &vacuum, ExecPolicy::default())?,
        None => evolve_circuit(&decomps, &vacuum, opts.rank_budget, ExecPolicy::default())?,
    };
    let mut out = json!({
        "rank": sup.k(),
        "distinct_states": sup.states.len(),
        "l1_norm": sup.l1_norm(),
        "sparsified": opts.k.is_some(),
    });
    if opts.fast {
        let est = fast_norm(&sup, opts.epsilon, opts.p_fail, opts.seed, DEFAULT_FLOOR, ExecPolicy::default())?;
        out["method"] = json!("fast");
        out["value"] = json!(est.value);
        out["epsilon"] = json!(est.epsilon);
        out["p_fail"] = json!(est.p_fail);
        out["samples_used"] = json!(est.samples_used);
        out["additive_only"] = json!(est.additive_only);
    } else {
        out["method"] = json!("exact");
        out["value"] = json!(exact_norm(&sup, ExecPolicy::default())?);
    }
    Ok(out)
}

/// `sparsify-report --circuit <path> --k K --trials M`: trace statistics of
/// sparsified outputs against their predicted mean and variance bound.
pub fn sparsify_report(program: &CircuitProgram, k: usize, trials: usize, seed: u64, rank_budget: usize) -> Result<Value, CliError> {
    if trials < 2 {
        return Err(CliError::Validation("trials must be at least 2".into()));
    }
    let decomps = unitary_trajectory(program, seed)?;
    let l1sq: f64 = decomps.iter().map(|d| d.l1_squared()).product();
    let vacuum = GaussianState::vacuum(program.n);
    let exact_rank: f64 = decomps.iter().map(|d| d.rank() as f64).product();
    let ct = if exact_rank <= C_TILDE_RANK_LIMIT as f64 {
        let full = evolve_circuit(&decomps, &vacuum, rank_budget, ExecPolicy::default())?;
        let pairs: Vec<_> = full.terms.iter().map(|&(c, s)| (c, full.states[s].clone())).collect();
        Some(c_tilde(&pairs)?)
    } else {
        None
    };
    let traces = ExecPolicy::default().map_range(trials, |t| -> Result<f64, fgsim::Error> {
        let sup = sparsify_circuit(&decomps, k, fgsim::sampler::derived_seed(seed, &[t as u64]))?.evolve(&decomps, &vacuum, ExecPolicy::Sequential)?;
        exact_norm(&sup, ExecPolicy::Sequential)
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mean = traces.iter().sum::<f64>() / trials as f64;
    let var = traces.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let bound = ct.map(|c| variance_bound(c, l1sq, k));
    Ok(json!({
        "k": k,
        "trials": trials,
        "l1_squared": l1sq,
        "c_tilde": ct,
        "trace_mean": mean,
        "trace_variance": var,
        "trace_standard_error": (var / trials as f64).sqrt(),
        "expected_trace": expected_trace(l1sq, k),
        "variance_bound": bound,
        "ensemble_bound": bound.map(|b| ensemble_bound(l1sq, k, b)),
    }))
}
