//! Content catalog, Zipf popularity, file groups and the request-driven
//! probabilities derived from them.
//!
//! Files are ranked `1..=catalog_size` by popularity. With cache size `N`,
//! the catalog splits into `K0 = catalog_size / N` consecutive file groups;
//! the `k`-th user of every cluster caches group `k`, so a cluster of `K`
//! users holds groups `1..=K`.

use crate::error::{domain, Result};

/// Above this many factors, products of probabilities are accumulated as
/// sums of logarithms.
const LOG_PRODUCT_THRESHOLD: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PopularityModel {
    catalog_size: usize,
    cache_size: usize,
    zipf_beta: f64,
    pmf: Vec<f64>,
    group_probs: Vec<f64>,
}

/// Users, users per cluster and cluster count, with `K * B = M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClusterConfig {
    pub total_users: usize,
    pub users_per_cluster: usize,
    pub cluster_count: usize,
}

impl ClusterConfig {
    pub fn new(total_users: usize, users_per_cluster: usize) -> Result<Self> {
        if users_per_cluster == 0 || total_users == 0 {
            return Err(domain("total users and users per cluster must be at least 1"));
        }
        if !total_users.is_multiple_of(users_per_cluster) {
            return Err(domain(format!(
                "users per cluster {users_per_cluster} does not divide total users {total_users}"
            )));
        }
        Ok(Self {
            total_users,
            users_per_cluster,
            cluster_count: total_users / users_per_cluster,
        })
    }
}

impl PopularityModel {
    pub fn new(catalog_size: usize, cache_size: usize, zipf_beta: f64) -> Result<Self> {
        if catalog_size == 0 {
            return Err(domain("catalog size must be at least 1"));
        }
        if cache_size == 0 || cache_size > catalog_size {
            return Err(domain(format!(
                "cache size {cache_size} must lie in 1..={catalog_size}"
            )));
        }
        if !catalog_size.is_multiple_of(cache_size) {
            return Err(domain(format!(
                "cache size {cache_size} does not divide catalog size {catalog_size}"
            )));
        }
        if !(zipf_beta.is_finite() && zipf_beta >= 0.0) {
            return Err(domain(format!("zipf beta {zipf_beta} must be finite and >= 0")));
        }

        let weights: Vec<f64> = (1..=catalog_size)
            .map(|i| (i as f64).powf(-zipf_beta))
            .collect();
        // Smallest terms first.
        let norm: f64 = weights.iter().rev().sum();
        let pmf: Vec<f64> = weights.iter().map(|w| w / norm).collect();
        let group_probs = weights
            .chunks(cache_size)
            .map(|chunk| chunk.iter().rev().sum::<f64>() / norm)
            .collect();

        Ok(Self {
            catalog_size,
            cache_size,
            zipf_beta,
            pmf,
            group_probs,
        })
    }

    pub fn catalog_size(&self) -> usize {
        self.catalog_size
    }

    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    pub fn zipf_beta(&self) -> f64 {
        self.zipf_beta
    }

    /// Number of file groups `K0`.
    pub fn group_count(&self) -> usize {
        self.group_probs.len()
    }

    /// Request probabilities of all files, most popular first.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Request probabilities `P_k` of all file groups.
    pub fn group_probs(&self) -> &[f64] {
        &self.group_probs
    }

    /// Request probability of file `i` (1-based).
    pub fn zipf_pmf(&self, i: usize) -> Result<f64> {
        if i == 0 || i > self.catalog_size {
            return Err(domain(format!(
                "file index {i} outside 1..={}",
                self.catalog_size
            )));
        }
        Ok(self.pmf[i - 1])
    }

    /// Probability that a request falls in group `k` (1-based).
    pub fn group_prob(&self, k: usize) -> Result<f64> {
        self.check_group(k)?;
        Ok(self.group_probs[k - 1])
    }

    /// Group (1-based) holding file `i` (1-based).
    pub fn group_of_file(&self, i: usize) -> usize {
        (i - 1) / self.cache_size + 1
    }

    /// Probability that a cluster of `users_per_cluster` users hits group `k`.
    pub fn hit_prob(&self, k: usize, users_per_cluster: usize) -> Result<f64> {
        self.check_group(k)?;
        if users_per_cluster == 0 {
            return Err(domain("users per cluster must be at least 1"));
        }
        Ok(hit_probability(self.group_probs[k - 1], users_per_cluster))
    }

    /// Total request mass of the groups cached in a cluster of `K` users.
    pub fn cached_mass(&self, users_per_cluster: usize) -> f64 {
        let k = users_per_cluster.min(self.group_count());
        self.group_probs[..k].iter().rev().sum::<f64>().min(1.0)
    }

    /// Probability that at least one cached group is hit by every cluster.
    pub fn coop_prob(&self, cfg: &ClusterConfig) -> Result<f64> {
        self.check_cluster(cfg)?;
        let b = cfg.cluster_count as i32;
        let misses = self.group_probs[..cfg.users_per_cluster].iter().map(|&p| {
            let ph = hit_probability(p, cfg.users_per_cluster);
            1.0 - ph.powi(b)
        });
        let none_hit = product(misses, cfg.users_per_cluster);
        Ok((1.0 - none_hit).clamp(0.0, 1.0))
    }

    /// Expected number of simultaneously active Coop links, `B * P^c`.
    pub fn avg_active_coop(&self, cfg: &ClusterConfig) -> Result<f64> {
        Ok(cfg.cluster_count as f64 * self.coop_prob(cfg)?)
    }

    /// Expected number of users whose group is not cached in their cluster.
    pub fn avg_cellular_users(&self, cfg: &ClusterConfig) -> Result<f64> {
        self.check_cluster(cfg)?;
        let uncached = (1.0 - self.cached_mass(cfg.users_per_cluster)).max(0.0);
        Ok(cfg.total_users as f64 * uncached)
    }

    /// Probability that a cluster holds a user who can be served over D2D by
    /// someone other than itself: `1 - prod_j (1 - S + P_j)` with `S` the
    /// cached mass and user `j` caching group `j`.
    pub fn ncoop_occupancy(&self, cfg: &ClusterConfig) -> Result<f64> {
        self.check_cluster(cfg)?;
        let k = cfg.users_per_cluster;
        let mass = self.cached_mass(k);
        let idle = product(
            self.group_probs[..k].iter().map(|&p| (1.0 - mass + p).clamp(0.0, 1.0)),
            k,
        );
        Ok((1.0 - idle).clamp(0.0, 1.0))
    }

    /// Rejects cluster configurations with more users per cluster than groups.
    pub fn check_cluster(&self, cfg: &ClusterConfig) -> Result<()> {
        if cfg.users_per_cluster > self.group_count() {
            return Err(domain(format!(
                "users per cluster {} exceeds the group count {}",
                cfg.users_per_cluster,
                self.group_count()
            )));
        }
        Ok(())
    }

    fn check_group(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.group_count() {
            return Err(domain(format!(
                "group index {k} outside 1..={}",
                self.group_count()
            )));
        }
        Ok(())
    }
}

/// `1 - (1 - p)^n`, accurate for small `p`.
pub(crate) fn hit_probability(p: f64, n: usize) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    (-(n as f64 * (-p).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

/// Product of factors in `[0, 1]`; switches to log space for long products.
pub(crate) fn product(factors: impl Iterator<Item = f64>, len: usize) -> f64 {
    if len > LOG_PRODUCT_THRESHOLD {
        let mut log_sum = 0.0;
        for x in factors {
            if x <= 0.0 {
                return 0.0;
            }
            log_sum += x.ln();
        }
        log_sum.exp()
    } else {
        factors.product()
    }
}
