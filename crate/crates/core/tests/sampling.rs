mod common;

use fgsim::sampler::{sample_adaptive, sample_approx, sample_exact, total_variation};
use fgsim::SamplerConfig;

#[test]
fn exact_sampler_matches_born_rule() {
    let c = common::two_magic_circuit();
    let want = c.dense_distribution(&c.measured()).unwrap();
    let run = sample_exact(&c, &SamplerConfig { shots: 20_000, seed: 1, ..Default::default() }).unwrap();
    let tvd = total_variation(&run.histogram(), &want);
    assert!(tvd < 0.03, "tvd {tvd}");
    assert!(run.reports.iter().all(|r| r.k == 4 && (r.cost - (1.0 + (std::f64::consts::PI / 3.0).sin()).powi(2)).abs() < 1e-12));
}

#[test]
fn approximate_sampler_is_close() {
    let c = common::two_magic_circuit();
    let want = c.dense_distribution(&c.measured()).unwrap();
    let cfg = SamplerConfig { shots: 20_000, seed: 2, shots_per_draw: 200, ..Default::default() }.with_budget(0.1);
    let t = std::time::Instant::now();
    let run = sample_approx(&c, &cfg).unwrap();
    let tvd = total_variation(&run.histogram(), &want);
    eprintln!("approx tvd {tvd} in {:?}, k={}", t.elapsed(), run.reports[0].k);
    assert!(tvd < 0.12, "tvd {tvd}");
}

#[test]
fn adaptive_sampler_matches_channel() {
    for p in [0.5, 0.1] {
        let c = common::adaptive_circuit(p);
        let want = c.dense_distribution(&c.measured()).unwrap();
        let cfg = SamplerConfig { shots: 20_000, seed: 3, shots_per_draw: 20, ..Default::default() }.with_budget(0.1);
        let t = std::time::Instant::now();
        let run = sample_adaptive(&c, &cfg).unwrap();
        let tvd = total_variation(&run.histogram(), &want);
        eprintln!("adaptive p={p} tvd {tvd} in {:?}", t.elapsed());
        assert!(tvd < 0.05, "p={p}: tvd {tvd}");
    }
}

#[test]
fn sampling_is_deterministic_across_policies() {
    let c = common::two_magic_circuit();
    let base = SamplerConfig { shots: 300, seed: 9, shots_per_draw: 30, ..Default::default() }.with_budget(0.3);
    let a = sample_approx(&c, &SamplerConfig { policy: fgsim::ExecPolicy::Sequential, ..base.clone() }).unwrap();
    let b = sample_approx(&c, &SamplerConfig { policy: fgsim::ExecPolicy::Parallel, ..base }).unwrap();
    assert_eq!(a.reports, b.reports);
}
