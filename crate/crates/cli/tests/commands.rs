use serde_json::Value;
use std::io::Write;
use std::process::Command;

fn circuit_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn fgsim(args: &[&str], env: &[(&str, &str)]) -> (i32, String, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_fgsim")).args(args).envs(env.iter().copied()).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&text).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {text}"));
    (out.status.code().unwrap(), text, json)
}

const TWO_RZZ: &str = r#"{"schema_version":1,"n":2,"elements":[
  {"type":"gate","id":"rzz","theta":1.5707963267948966,"targets":[0,1]},
  {"type":"gate","id":"rxx_nn","theta":0.3,"targets":[0,1]},
  {"type":"gate","id":"rzz","theta":1.5707963267948966,"targets":[0,1]}
]}"#;

const MIXED: &str = r#"{"schema_version":1,"n":4,"metadata":{"name":"mixed"},"elements":[
  {"type":"gate","id":"rxx_nn","theta":0.7,"targets":[0,1]},
  {"type":"gate","id":"rzz","theta":1.0471975511965976,"targets":[0,2]},
  {"type":"gate","id":"ryy_nn","theta":0.4,"targets":[1,2]},
  {"type":"channel","id":"noisy_rzz","theta":0.5,"p":0.1,"noise":"zz","targets":[1,3]},
  {"type":"gate","id":"rxy_nn","theta":1.1,"targets":[2,3]},
  {"type":"measure","targets":[0,1,2,3]}
]}"#;

#[test]
fn decompose_hadamard() {
    let (code, _, v) = fgsim(&["decompose", "--gate", "hadamard"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["terms"].as_array().unwrap().len(), 2);
    assert!((v["extent"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let c = v["terms"][0]["coefficient"][0].as_f64().unwrap();
    assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn decompose_negative_angle() {
    let (code, _, v) = fgsim(&["decompose", "--gate", "cphase", "--theta", "-1.2"], &[]);
    assert_eq!(code, 0);
    assert!((v["cost"].as_f64().unwrap() - (1.0 + 0.6f64.sin())).abs() < 1e-12);
}

#[test]
fn extent_of_two_rzz_is_four() {
    let f = circuit_file(TWO_RZZ);
    let (code, _, v) = fgsim(&["extent", "--circuit", f.path().to_str().unwrap()], &[]);
    assert_eq!(code, 0);
    assert!((v["total_cost"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["elements"].as_array().unwrap().len(), 3);
}

#[test]
fn noisy_rzz_element_cost() {
    let f = circuit_file(r#"{"schema_version":1,"n":2,"elements":[{"type":"channel","id":"noisy_rzz","theta":0.5,"p":0.1,"noise":"zz","targets":[0,1]}]}"#);
    let (code, _, v) = fgsim(&["extent", "--circuit", f.path().to_str().unwrap()], &[]);
    assert_eq!(code, 0);
    assert!((v["total_cost"].as_f64().unwrap() - (1.0 + 0.8 * 0.5f64.sin())).abs() < 1e-12);
}

#[test]
fn out_of_range_target_names_element() {
    let f = circuit_file(r#"{"schema_version":1,"n":2,"elements":[{"type":"gate","id":"rzz","theta":1.0,"targets":[0,5]}]}"#);
    let (code, _, v) = fgsim(&["extent", "--circuit", f.path().to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "validation");
    assert!(v["error"]["message"].as_str().unwrap().contains("element 0"));
}

#[test]
fn malformed_json_reports_position() {
    let f = circuit_file("{\"schema_version\":1,\n\"n\":2,\n\"elements\":[}\n");
    let (code, _, v) = fgsim(&["extent", "--circuit", f.path().to_str().unwrap()], &[]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 3);
    assert!(v["error"]["column"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_keys_rejected() {
    for text in [
        r#"{"schema_version":1,"n":2,"elements":[],"extra":1}"#,
        r#"{"schema_version":1,"n":2,"elements":[{"type":"gate","id":"h","targets":[0],"angle":1}]}"#,
        r#"{"schema_version":1,"n":2,"elements":[{"type":"gate","id":"h","theta":1.0,"targets":[0]}]}"#,
    ] {
        let f = circuit_file(text);
        let (code, _, v) = fgsim(&["extent", "--circuit", f.path().to_str().unwrap()], &[]);
        assert_eq!(code, 2, "{text}");
        assert_eq!(v["error"]["kind"], "validation");
    }
}

#[test]
fn rank_budget_is_a_resource_error() {
    let f = circuit_file(TWO_RZZ);
    let (code, _, v) = fgsim(&["sample", "--circuit", f.path().to_str().unwrap(), "--shots", "3", "--rank-budget", "2"], &[]);
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "resource_limit");
}

#[test]
fn bad_thread_count_rejected() {
    let (code, _, v) = fgsim(&["decompose", "--gate", "h"], &[("FGSIM_THREADS", "zero")]);
    assert_eq!(code, 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("FGSIM_THREADS"));
}

#[test]
fn sample_output_shape() {
    let f = circuit_file(MIXED);
    let args = ["sample", "--circuit", f.path().to_str().unwrap(), "--shots", "40", "--mode", "approx", "--delta", "0.05", "--eps", "0.05", "--seed", "9", "--qubits", "0..=2"];
    let (code, text, v) = fgsim(&args, &[("FGSIM_THREADS", "2")]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(v["mode"], "approx");
    assert_eq!(v["qubits"], serde_json::json!([0, 1, 2]));
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 40);
    for s in samples {
        assert_eq!(s["bits"].as_str().unwrap().len(), 3);
        assert_eq!(s["probabilities"].as_array().unwrap().len(), 3);
        assert!(s["k"].as_u64().unwrap() >= 1);
        assert!(s["cost"].as_f64().unwrap() >= 1.0);
    }
    let total: u64 = v["counts"].as_object().unwrap().values().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, 40);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let f = circuit_file(MIXED);
    let path = f.path().to_str().unwrap();
    let strip = |text: &str| text.lines().filter(|l| !l.contains("elapsed_seconds")).collect::<Vec<_>>().join("\n");
    for mode in ["exact", "approx"] {
        let args = ["sample", "--circuit", path, "--shots", "25", "--mode", mode, "--seed", "4"];
        let (_, a, _) = fgsim(&args, &[("FGSIM_THREADS", "1")]);
        let (_, b, _) = fgsim(&args, &[("FGSIM_THREADS", "3")]);
        assert_eq!(strip(&a), strip(&b), "mode {mode}");
    }
    let args = ["sparsify-report", "--circuit", path, "--k", "8", "--trials", "50", "--seed", "2"];
    assert_eq!(fgsim(&args, &[]).1, fgsim(&args, &[]).1);
}

#[test]
fn norm_modes() {
    let f = circuit_file(TWO_RZZ);
    let path = f.path().to_str().unwrap();
    let (code, _, v) = fgsim(&["norm", "--circuit", path], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["rank"], 4);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (_, _, exact) = fgsim(&["norm", "--circuit", path, "--k", "6", "--seed", "3"], &[]);
    let (code, _, fast) = fgsim(&["norm", "--circuit", path, "--k", "6", "--seed", "3", "--mode", "fast", "--eps", "0.05"], &[]);
    assert_eq!(code, 0);
    let (e, a) = (exact["value"].as_f64().unwrap(), fast["value"].as_f64().unwrap());
    assert!((a - e).abs() <= 0.05 * e, "{a} vs {e}");
}

#[test]
fn sparsify_report_fields() {
    let f = circuit_file(TWO_RZZ);
    let (code, _, v) = fgsim(&["sparsify-report", "--circuit", f.path().to_str().unwrap(), "--k", "4", "--trials", "400"], &[]);
    assert_eq!(code, 0);
    let expected = 1.0 + 3.0 / 4.0;
    assert!((v["expected_trace"].as_f64().unwrap() - expected).abs() < 1e-12);
    let (mean, se) = (v["trace_mean"].as_f64().unwrap(), v["trace_standard_error"].as_f64().unwrap());
    assert!((mean - expected).abs() < 4.0 * se + 1e-12);
    assert!(v["trace_variance"].as_f64().unwrap() <= v["variance_bound"].as_f64().unwrap());
}
