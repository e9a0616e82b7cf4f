//! Request sampling and full-network simulation against the closed forms.

use d2d_coopnet::counting::{avg_coop, avg_ncoop, CoopCountMethod};
use d2d_coopnet::montecarlo::{drop_rng, run, run_baseline_tdma, Network, RequestSampler, SimConfig};
use d2d_coopnet::popularity::{ClusterConfig, PopularityModel};
use d2d_coopnet::Scenario;

#[test]
fn zipf_request_frequencies() {
    let model = PopularityModel::new(300, 10, 0.8).unwrap();
    let sampler = RequestSampler::new(&model);
    let mut rng = drop_rng(5, 0);
    let n = 1_000_000;
    let mut counts = vec![0u32; 300];
    for _ in 0..n {
        counts[sampler.sample(&mut rng) - 1] += 1;
    }
    for (i, (&c, &p)) in counts.iter().zip(model.pmf()).enumerate() {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let freq = c as f64 / n as f64;
        assert!((freq - p).abs() < 5.0 * se, "file {}: {freq} vs {p}", i + 1);
    }
}

#[test]
fn network_counts_match_closed_forms() {
    let model = PopularityModel::new(300, 10, 1.0).unwrap();
    let k = 10;
    let net = Network::new(&model, &Scenario::hotspot_defaults(), k).unwrap();
    let sim = SimConfig {
        drops: 4000,
        fading_draws: 1,
        seed: 9,
        ..SimConfig::default()
    };
    let report = run(&net, &sim).unwrap();
    let cfg = ClusterConfig::new(180, k).unwrap();
    let c = &report.counts;
    assert!(c.coop_prob.z_score(model.coop_prob(&cfg).unwrap()) < 4.0);
    assert!(c.active_coop.z_score(model.avg_active_coop(&cfg).unwrap()) < 4.0);
    assert!(c.coop_users.z_score(avg_coop(&cfg, &model, CoopCountMethod::Exact).unwrap()) < 4.0);
    assert!(c.ncoop_users.z_score(avg_ncoop(&cfg, &model, CoopCountMethod::Exact).unwrap()) < 4.0);
    assert!(c.cellular_users.z_score(model.avg_cellular_users(&cfg).unwrap()) < 4.0);
}

#[test]
fn optimized_strategy_beats_tdma_at_high_skew() {
    let model = PopularityModel::new(300, 10, 1.0).unwrap();
    let net = Network::new(&model, &Scenario::hotspot_defaults(), 9).unwrap();
    let sim = SimConfig {
        eta: 0.926,
        drops: 300,
        seed: 3,
        ..SimConfig::default()
    };
    let coop = run(&net, &sim).unwrap();
    let tdma = run_baseline_tdma(&net, &sim).unwrap();
    assert!(coop.throughput.mean > tdma.throughput.mean);
}
