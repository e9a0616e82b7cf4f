//! Joint choice of cluster size `K` and bandwidth split `eta`.
//!
//! For a fixed `K` the throughput is linear in `eta`, so the optimum sits on
//! whichever end of the feasible interval the slope favours:
//!
//! ```text
//! lower = N_c mu / (W B R_c)          (Coop users reach mu)
//! upper = 1 - N_n mu / (W B R_n)      (N-Coop users reach mu)
//! ```
//!
//! `K` is then enumerated over the divisors of `M` not above `K0`.
//!
//! With [`Objective::Occupied`] the N-Coop rate is scaled by the probability
//! that a cluster has an N-Coop receiver to serve at all; without it tiny
//! clusters look best because every one of the `B` clusters is credited
//! with a link.

use rayon::prelude::*;

use crate::counting::{CoopCountMethod, UserCounts};
use crate::error::{domain, Result};
use crate::linkrates::{network_throughput, user_rates, LinkRates, RadioConfig, UserRate};
use crate::popularity::{ClusterConfig, PopularityModel};
use crate::scenario::Scenario;

/// Throughput model maximized over `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Every cluster runs an N-Coop link.
    Nominal,
    /// N-Coop links only in clusters holding a user served by someone else.
    #[default]
    Occupied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OptimizerOptions {
    pub count_method: CoopCountMethod,
    pub objective: Objective,
}

/// Closed-form bandwidth split of one cluster size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    Feasible { eta: f64, lower: f64, upper: f64 },
    /// Both rate floors cannot hold together (`lower > upper`).
    Infeasible { lower: f64, upper: f64 },
}

impl EtaChoice {
    pub fn eta(&self) -> Option<f64> {
        match *self {
            EtaChoice::Feasible { eta, .. } => Some(eta),
            EtaChoice::Infeasible { .. } => None,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            EtaChoice::Feasible { lower, upper, .. } | EtaChoice::Infeasible { lower, upper } => {
                (lower, upper)
            }
        }
    }
}

/// Feasible interval of `eta` and the end of it that maximizes throughput.
pub fn choose_eta(
    radio: &RadioConfig,
    rates: &LinkRates,
    counts: &UserCounts,
    rate_floor: f64,
) -> EtaChoice {
    let wb = radio.bandwidth_hz * radio.cluster_count as f64;
    let lower = if counts.coop > 0.0 {
        counts.coop * rate_floor / (wb * rates.coop_se)
    } else {
        0.0
    };
    let upper = if counts.ncoop > 0.0 {
        1.0 - counts.ncoop * rate_floor / (wb * rates.ncoop_se)
    } else {
        1.0
    };
    let lower = lower.max(0.0);
    let upper = upper.min(1.0);
    if lower > upper || upper < 0.0 || !lower.is_finite() || !upper.is_finite() {
        return EtaChoice::Infeasible { lower, upper };
    }
    let eta = if rates.coop_se >= rates.ncoop_se { upper } else { lower };
    EtaChoice::Feasible { eta, lower, upper }
}

/// `eta*` for cluster size `users_per_cluster`.
pub fn eta_star(
    users_per_cluster: usize,
    model: &PopularityModel,
    scenario: &Scenario,
    rate_floor: f64,
) -> Result<EtaChoice> {
    Ok(evaluate_k(users_per_cluster, model, scenario, rate_floor, OptimizerOptions::default())?.choice)
}

/// Everything the optimizer computed for one cluster size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KEvaluation {
    pub users_per_cluster: usize,
    pub cluster_count: usize,
    pub coop_prob: f64,
    pub counts: UserCounts,
    /// Closed-form link rates.
    pub rates: LinkRates,
    /// Factor applied to the N-Coop rate by the objective.
    pub occupancy: f64,
    pub choice: EtaChoice,
    /// Throughput at `eta*`, or at the nearest interval end when infeasible.
    pub throughput: f64,
    pub coop_user_rate: UserRate,
    pub ncoop_user_rate: UserRate,
}

impl KEvaluation {
    pub fn feasible(&self) -> bool {
        matches!(self.choice, EtaChoice::Feasible { .. })
    }

    pub fn eta(&self) -> Option<f64> {
        self.choice.eta()
    }

    /// N-Coop spectral efficiency seen by the objective.
    pub fn effective_ncoop_se(&self) -> f64 {
        self.rates.ncoop_se * self.occupancy
    }
}

pub fn evaluate_k(
    users_per_cluster: usize,
    model: &PopularityModel,
    scenario: &Scenario,
    rate_floor: f64,
    options: OptimizerOptions,
) -> Result<KEvaluation> {
    if !(rate_floor.is_finite() && rate_floor >= 0.0) {
        return Err(domain(format!("rate floor {rate_floor} must be finite and >= 0")));
    }
    let cfg = ClusterConfig::new(scenario.total_users, users_per_cluster)?;
    model.check_cluster(&cfg)?;
    let radio = scenario.radio(cfg.cluster_count)?;
    let rates = LinkRates::evaluate(&radio)?;
    let counts = UserCounts::evaluate(&cfg, model, options.count_method)?;
    let coop_prob = model.coop_prob(&cfg)?;
    let occupancy = match options.objective {
        Objective::Nominal => 1.0,
        Objective::Occupied => model.ncoop_occupancy(&cfg)?,
    };
    let mut effective = rates;
    effective.ncoop_se *= occupancy;
    let choice = choose_eta(&radio, &effective, &counts, rate_floor);
    let eta = match choice {
        EtaChoice::Feasible { eta, .. } => eta,
        EtaChoice::Infeasible { upper, .. } => upper.clamp(0.0, 1.0),
    };
    let users = user_rates(&radio, eta, counts.coop, counts.ncoop, effective.coop_se, effective.ncoop_se);
    Ok(KEvaluation {
        users_per_cluster,
        cluster_count: cfg.cluster_count,
        coop_prob,
        counts,
        rates,
        occupancy,
        choice,
        throughput: network_throughput(&radio, eta, coop_prob, effective.coop_se, effective.ncoop_se),
        coop_user_rate: users.coop,
        ncoop_user_rate: users.ncoop,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Index into `per_k` of the best feasible cluster size.
    pub best: Option<usize>,
    pub per_k: Vec<KEvaluation>,
}

impl OptimizationResult {
    pub fn best_entry(&self) -> Option<&KEvaluation> {
        self.best.map(|i| &self.per_k[i])
    }

    pub fn best_k(&self) -> Option<usize> {
        self.best_entry().map(|e| e.users_per_cluster)
    }

    pub fn best_eta(&self) -> Option<f64> {
        self.best_entry().and_then(|e| e.eta())
    }

    pub fn best_throughput(&self) -> Option<f64> {
        self.best_entry().map(|e| e.throughput)
    }

    pub fn is_feasible(&self) -> bool {
        self.best.is_some()
    }
}

/// Cluster sizes the optimizer may choose: divisors of `M` up to `K0`.
pub fn candidate_cluster_sizes(total_users: usize, group_count: usize) -> Vec<usize> {
    (1..=group_count.min(total_users))
        .filter(|k| total_users.is_multiple_of(*k))
        .collect()
}

/// Maximizes throughput over `K` and `eta` under both rate floors.
///
/// Ties go to the smaller `K`.
pub fn optimize(model: &PopularityModel, scenario: &Scenario, rate_floor: f64) -> Result<OptimizationResult> {
    optimize_with(model, scenario, rate_floor, OptimizerOptions::default())
}

pub fn optimize_with(
    model: &PopularityModel,
    scenario: &Scenario,
    rate_floor: f64,
    options: OptimizerOptions,
) -> Result<OptimizationResult> {
    if scenario.total_users == 0 {
        return Err(domain("total users must be at least 1"));
    }
    let sizes = candidate_cluster_sizes(scenario.total_users, model.group_count());
    let per_k = sizes
        .par_iter()
        .map(|&k| evaluate_k(k, model, scenario, rate_floor, options))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<usize> = None;
    for (i, e) in per_k.iter().enumerate() {
        if !e.feasible() {
            continue;
        }
        match best {
            Some(b) if per_k[b].throughput >= e.throughput => {}
            _ => best = Some(i),
        }
    }
    Ok(OptimizationResult { best, per_k })
}
