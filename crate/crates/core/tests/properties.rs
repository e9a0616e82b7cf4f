//! Model-wide invariants.

use proptest::prelude::*;

use d2d_coopnet::linkrates::{network_throughput, user_rates};
use d2d_coopnet::montecarlo::{classify, drop_rng, generate_drop, run, Network, Placement, SimConfig};
use d2d_coopnet::optimizer::{candidate_cluster_sizes, evaluate_k, OptimizerOptions};
use d2d_coopnet::popularity::{ClusterConfig, PopularityModel};
use d2d_coopnet::Scenario;

fn divisor_k() -> impl Strategy<Value = usize> {
    prop::sample::select(candidate_cluster_sizes(180, 30))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn drop_identities(beta in 0.0f64..1.5, k in divisor_k(), seed in any::<u64>(), min in 2usize..6) {
        let model = PopularityModel::new(300, 10, beta).unwrap();
        let net = Network::new(&model, &Scenario::hotspot_defaults(), k).unwrap();
        let b = net.cluster_count();
        let mut rng = drop_rng(seed, 0);
        let d = generate_drop(&net.layout, &model, net.sampler(), k, Placement::PerCell, &mut rng);
        let full = classify(&d, b);
        prop_assert_eq!(full.coop_users + full.ncoop_users + full.cellular_users, 180);
        if b >= 2 {
            let partial = classify(&d, min.min(b));
            prop_assert_eq!(partial.coop_users + partial.ncoop_users + partial.cellular_users, 180);
            // Full cooperation implies partial cooperation.
            prop_assert!(!full.mode1() || partial.mode1());
            prop_assert!(partial.coop_users >= full.coop_users);
        }
    }

    #[test]
    fn coop_prob_non_decreasing_in_k(beta in 0.0f64..2.0) {
        let model = PopularityModel::new(300, 10, beta).unwrap();
        let pc: Vec<f64> = candidate_cluster_sizes(180, 30)
            .into_iter()
            .map(|k| model.coop_prob(&ClusterConfig::new(180, k).unwrap()).unwrap())
            .collect();
        prop_assert!(pc.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn eta_star_is_optimal(beta in 0.0f64..1.2, k in divisor_k(), mu in 2e5f64..3e6, eta in 0.0f64..=1.0) {
        let model = PopularityModel::new(300, 10, beta).unwrap();
        let s = Scenario::hotspot_defaults();
        let ev = evaluate_k(k, &model, &s, mu, OptimizerOptions::default()).unwrap();
        let Some(star) = ev.eta() else { return Ok(()) };
        let (lo, hi) = ev.choice.bounds();
        prop_assert!(lo <= star && star <= hi);
        let radio = s.radio(ev.cluster_count).unwrap();
        let rn = ev.effective_ncoop_se();
        let u = user_rates(&radio, eta, ev.counts.coop, ev.counts.ncoop, ev.rates.coop_se, rn);
        if u.coop.meets(mu) && u.ncoop.meets(mu) {
            let t = network_throughput(&radio, eta, ev.coop_prob, ev.rates.coop_se, rn);
            prop_assert!(ev.throughput >= t * (1.0 - 1e-12));
        }
    }
}

#[test]
fn same_seed_same_report() {
    let model = PopularityModel::new(300, 10, 0.7).unwrap();
    let net = Network::new(&model, &Scenario::hotspot_defaults(), 12).unwrap();
    let sim = SimConfig {
        drops: 120,
        seed: 42,
        coop_min_clusters: Some(3),
        ..SimConfig::default()
    };
    assert_eq!(run(&net, &sim).unwrap(), run(&net, &sim).unwrap());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    assert_eq!(pool.install(|| run(&net, &sim).unwrap()), run(&net, &sim).unwrap());
}
