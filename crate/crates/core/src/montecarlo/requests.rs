//! Request-only sampling of user classes, without radio.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::geometry::ClusterLayout;
use crate::popularity::{ClusterConfig, PopularityModel};

use super::drop::{classify, generate_drop, RequestSampler};
use super::{drop_rng, CountStats, DropCounts, Placement};

/// Empirical class counts over `draws` independent request draws.
///
/// `coop_min_clusters = None` is full cooperation.
pub fn request_statistics(
    model: &PopularityModel,
    cfg: &ClusterConfig,
    coop_min_clusters: Option<usize>,
    draws: usize,
    seed: u64,
) -> Result<CountStats> {
    if draws == 0 {
        return Err(domain("draws must be at least 1"));
    }
    let b = cfg.cluster_count;
    let layout = ClusterLayout::build(1.0, b)?;
    let sampler = RequestSampler::new(model);
    let threshold = coop_min_clusters.unwrap_or(b);
    let counts: Vec<DropCounts> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = drop_rng(seed, i as u64);
            let d = generate_drop(&layout, model, &sampler, cfg.users_per_cluster, Placement::PerCell, &mut rng);
            DropCounts::new(&classify(&d, threshold), b)
        })
        .collect();
    Ok(CountStats::from_counts(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{avg_coop, avg_ncoop, CoopCountMethod};

    #[test]
    fn matches_closed_forms() {
        let model = PopularityModel::new(300, 10, 0.8).unwrap();
        let cfg = ClusterConfig::new(180, 10).unwrap();
        let s = request_statistics(&model, &cfg, None, 20_000, 3).unwrap();
        let pc = model.coop_prob(&cfg).unwrap();
        assert!(s.coop_prob.z_score(pc) < 4.0);
        let nc = avg_coop(&cfg, &model, CoopCountMethod::Exact).unwrap();
        assert!(s.coop_users.z_score(nc) < 4.0);
        let nn = avg_ncoop(&cfg, &model, CoopCountMethod::Exact).unwrap();
        assert!(s.ncoop_users.z_score(nn) < 4.0);
        let nb = model.avg_cellular_users(&cfg).unwrap();
        assert!(s.cellular_users.z_score(nb) < 4.0);
    }

    #[test]
    fn zero_draws_rejected() {
        let model = PopularityModel::new(300, 10, 0.8).unwrap();
        let cfg = ClusterConfig::new(180, 10).unwrap();
        assert!(request_statistics(&model, &cfg, None, 0, 1).is_err());
    }
}
