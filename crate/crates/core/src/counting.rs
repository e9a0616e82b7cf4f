//! Expected numbers of Coop, N-Coop and cellular users.
//!
//! A request configuration records, for each cluster `i` and group `k`, the
//! number `n_ik` of users of cluster `i` requesting a file of group `k`.
//! Group `k <= K` is a hit group when every cluster has `n_ik > 0`; the
//! requesters of hit groups are the Coop users.
//!
//! [`exact_avg_coop`] evaluates the expectation over all configurations in
//! closed form. Clusters request independently, so by linearity
//! `E[sum_i zeta(k) n_ik] = B * E[n_ik] * P(n_jk > 0)^(B-1) = B K P_k (P^h_k)^(B-1)`.
//! [`enumerate_avg_coop`] walks the configurations one by one and is kept
//! as the reference for that identity.

use crate::error::{domain, Error, Result};
use crate::popularity::{hit_probability, product, ClusterConfig, PopularityModel};

/// Default cap on the number of configurations visited by raw enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestConfiguration {
    counts: Vec<Vec<u32>>,
    users_per_cluster: u32,
}

impl RequestConfiguration {
    /// `counts[i][k]` users of cluster `i` request group `k + 1`.
    pub fn new(counts: Vec<Vec<u32>>) -> Result<Self> {
        let first = counts
            .first()
            .ok_or_else(|| domain("a configuration needs at least one cluster"))?;
        let groups = first.len();
        let users: u32 = first.iter().sum();
        if groups == 0 || users == 0 {
            return Err(domain("clusters need at least one group and one user"));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != groups {
                return Err(domain(format!("cluster {i} has {} groups, expected {groups}", row.len())));
            }
            let s: u32 = row.iter().sum();
            if s != users {
                return Err(domain(format!("cluster {i} has {s} users, expected {users}")));
            }
        }
        Ok(Self {
            counts,
            users_per_cluster: users,
        })
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    pub fn cluster_count(&self) -> usize {
        self.counts.len()
    }

    pub fn users_per_cluster(&self) -> u32 {
        self.users_per_cluster
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Multinomial probability of one cluster's request counts.
fn cluster_prob(row: &[u32], group_probs: &[f64]) -> f64 {
    let users: u32 = row.iter().sum();
    let mut log_p = ln_factorial(users);
    for (&n, &p) in row.iter().zip(group_probs) {
        if n == 0 {
            continue;
        }
        if p == 0.0 {
            return 0.0;
        }
        log_p += n as f64 * p.ln() - ln_factorial(n);
    }
    log_p.exp()
}

/// Probability of a configuration: product over clusters of multinomials.
pub fn config_prob(cfg: &RequestConfiguration, model: &PopularityModel) -> Result<f64> {
    if cfg.counts[0].len() != model.group_count() {
        return Err(domain(format!(
            "configuration has {} groups, model has {}",
            cfg.counts[0].len(),
            model.group_count()
        )));
    }
    Ok(cfg
        .counts
        .iter()
        .map(|row| cluster_prob(row, model.group_probs()))
        .product())
}

/// Number of Coop users of a configuration when clusters cache groups `1..=cached`.
pub fn coop_count(cfg: &RequestConfiguration, cached: usize) -> u64 {
    let groups = cfg.counts[0].len().min(cached);
    (0..groups)
        .filter(|&k| cfg.counts.iter().all(|row| row[k] > 0))
        .map(|k| cfg.counts.iter().map(|row| row[k] as u64).sum::<u64>())
        .sum()
}

/// Exact expected number of Coop users.
pub fn exact_avg_coop(cfg: &ClusterConfig, model: &PopularityModel) -> Result<f64> {
    model.check_cluster(cfg)?;
    let k = cfg.users_per_cluster;
    let b = cfg.cluster_count;
    Ok(model.group_probs()[..k]
        .iter()
        .map(|&p| {
            let ph = hit_probability(p, k);
            (b * k) as f64 * p * ph.powi(b as i32 - 1)
        })
        .sum())
}

/// Number of request configurations `|Phi_N| = C(K + K0 - 1, K)^B`.
pub fn configuration_count(cfg: &ClusterConfig, groups: usize) -> f64 {
    let per_cluster = compositions_count(cfg.users_per_cluster, groups);
    per_cluster.powi(cfg.cluster_count as i32)
}

fn compositions_count(users: usize, groups: usize) -> f64 {
    // C(users + groups - 1, users)
    (1..=users).fold(1.0, |acc, i| acc * (groups - 1 + i) as f64 / i as f64)
}

/// All ways of splitting `users` requests over `groups` groups.
fn compositions(users: u32, groups: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for n in (0..=left).rev() {
            cur.push(n);
            rec(left - n, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(users, groups, &mut Vec::with_capacity(groups), &mut out);
    out
}

/// Expected number of Coop users by visiting every request configuration.
///
/// Fails with [`Error::EnumerationBudget`] when `|Phi_N|` exceeds `budget`.
pub fn enumerate_avg_coop(cfg: &ClusterConfig, model: &PopularityModel, budget: f64) -> Result<f64> {
    model.check_cluster(cfg)?;
    let groups = model.group_count();
    let states = configuration_count(cfg, groups);
    if states > budget {
        return Err(Error::EnumerationBudget { states, budget });
    }
    let comps = compositions(cfg.users_per_cluster as u32, groups);
    let probs: Vec<f64> = comps
        .iter()
        .map(|row| cluster_prob(row, model.group_probs()))
        .collect();
    let b = cfg.cluster_count;
    let mut idx = vec![0usize; b];
    let mut total = 0.0;
    loop {
        let rows: Vec<Vec<u32>> = idx.iter().map(|&j| comps[j].clone()).collect();
        let config = RequestConfiguration {
            counts: rows,
            users_per_cluster: cfg.users_per_cluster as u32,
        };
        let p: f64 = idx.iter().map(|&j| probs[j]).product();
        total += p * coop_count(&config, cfg.users_per_cluster) as f64;

        // Odometer increment, last cluster fastest.
        let mut pos = b;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < comps.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// One- plus two-hit-group approximation of the expected Coop users.
///
/// The two-group term sums over ordered pairs `(k1, k2)`, `k1 != k2`.
pub fn approx_avg_coop(cfg: &ClusterConfig, model: &PopularityModel) -> Result<f64> {
    model.check_cluster(cfg)?;
    let k = cfg.users_per_cluster;
    let b = cfg.cluster_count;
    let p = &model.group_probs()[..k];
    let ph: Vec<f64> = p.iter().map(|&x| hit_probability(x, k)).collect();
    let miss: Vec<f64> = ph.iter().map(|&h| 1.0 - h.powi(b as i32)).collect();
    let others_missed = |skip: &[usize]| {
        product(
            (0..k).filter(|j| !skip.contains(j)).map(|j| miss[j]),
            k,
        )
    };

    let single: f64 = (0..k)
        .map(|g| others_missed(&[g]) * ph[g].powi(b as i32 - 1) * (b * k) as f64 * p[g])
        .sum();

    let mut pair = 0.0;
    for k1 in 0..k {
        for k2 in 0..k {
            if k1 == k2 || ph[k1] == 0.0 || ph[k2] == 0.0 {
                continue;
            }
            let both = others_missed(&[k1, k2]) * (ph[k1] * ph[k2]).powi(b as i32);
            if both == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for m in 2..=k {
                for m1 in 1..m {
                    let m2 = m - m1;
                    inner += binomial(m, m1) * p[k1].powi(m1 as i32) * p[k2].powi(m2 as i32)
                        / (ph[k1] * ph[k2])
                        * m as f64;
                }
            }
            pair += both * b as f64 * inner;
        }
    }
    Ok(single + pair)
}

/// How the expected Coop count is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoopCountMethod {
    #[default]
    Exact,
    Approximate,
}

pub fn avg_coop(cfg: &ClusterConfig, model: &PopularityModel, method: CoopCountMethod) -> Result<f64> {
    match method {
        CoopCountMethod::Exact => exact_avg_coop(cfg, model),
        CoopCountMethod::Approximate => approx_avg_coop(cfg, model),
    }
}

/// `M - N_c - N_b`.
pub fn avg_ncoop(cfg: &ClusterConfig, model: &PopularityModel, method: CoopCountMethod) -> Result<f64> {
    let coop = avg_coop(cfg, model, method)?;
    let cellular = model.avg_cellular_users(cfg)?;
    Ok((cfg.total_users as f64 - coop - cellular).max(0.0))
}

/// Expected user counts of one cluster size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserCounts {
    pub coop: f64,
    pub ncoop: f64,
    pub cellular: f64,
}

impl UserCounts {
    pub fn evaluate(cfg: &ClusterConfig, model: &PopularityModel, method: CoopCountMethod) -> Result<Self> {
        let coop = avg_coop(cfg, model, method)?;
        let cellular = model.avg_cellular_users(cfg)?;
        Ok(Self {
            coop,
            ncoop: (cfg.total_users as f64 - coop - cellular).max(0.0),
            cellular,
        })
    }
}
