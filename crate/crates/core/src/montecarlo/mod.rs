//! Drop-level simulation of the cooperative strategy and its baselines.
//!
//! Every drop draws user positions, caches and requests, classifies users,
//! then runs `fading_draws` slots of scheduling and Rayleigh fading. Drop
//! `i` uses ChaCha8 stream `i` of the configured seed, drops run in
//! parallel, and all reductions run sequentially in drop order, so a report
//! depends only on `(seed, config)`.

pub mod drop;
pub mod linkcheck;
pub mod requests;
pub mod schedule;
pub mod sinr;
pub mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::geometry::ClusterLayout;
use crate::linkrates::RadioConfig;
use crate::popularity::{ClusterConfig, PopularityModel};
use crate::scenario::Scenario;

pub use drop::{classify, generate_drop, Classification, Drop, RequestSampler, User, UserClass};
pub use linkcheck::{estimate_link_efficiency, LinkEfficiency};
pub use requests::request_statistics;
pub use schedule::{schedule, Link, Schedule};
pub use sinr::CoopSinrMode;
pub use stats::{batch_means, Estimate, MeanSe, MIN_BATCHES};

use schedule::schedule_ncoop;
use sinr::{coop_sinr, draw_fading, gain_matrix, ncoop_sinr, sum_spectral_efficiency};

type Point = (f64, f64);

/// How users are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Exactly `K` users uniform in every cell.
    #[default]
    PerCell,
    /// `M` users uniform over the whole hotspot.
    Uniform,
}

/// Transmission strategy being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Coop and N-Coop bands split by `eta`.
    Cooperative,
    /// Every D2D user on one shared band, no coordination.
    Eta0,
    /// 2x2 reuse: one colour of clusters active per slot.
    Tdma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub eta: f64,
    pub drops: usize,
    /// Slots (independent fading and scheduling draws) per drop.
    pub fading_draws: usize,
    pub seed: u64,
    pub coop_mode: CoopSinrMode,
    pub placement: Placement,
    /// Minimum clusters hitting a group for partial cooperation; `None` is
    /// full cooperation.
    pub coop_min_clusters: Option<usize>,
    pub batches: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            eta: 0.5,
            drops: 1000,
            fading_draws: 10,
            seed: 1,
            coop_mode: CoopSinrMode::ZfExact,
            placement: Placement::PerCell,
            coop_min_clusters: None,
            batches: MIN_BATCHES,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, cluster_count: usize) -> Result<()> {
        if self.drops == 0 {
            return Err(domain("drops must be at least 1"));
        }
        if self.fading_draws == 0 {
            return Err(domain("fading_draws must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(domain(format!("eta = {} must lie in [0, 1]", self.eta)));
        }
        if let Some(c) = self.coop_min_clusters {
            if c < 2 || c > cluster_count {
                return Err(domain(format!(
                    "coop_min_clusters = {c} must lie in [2, B = {cluster_count}]"
                )));
            }
        }
        Ok(())
    }
}

/// RNG of drop `index`.
pub fn drop_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A deployment with a fixed cluster size.
#[derive(Debug, Clone)]
pub struct Network {
    pub model: PopularityModel,
    pub users_per_cluster: usize,
    pub layout: ClusterLayout,
    pub radio: RadioConfig,
    sampler: RequestSampler,
}

impl Network {
    pub fn new(model: &PopularityModel, scenario: &Scenario, users_per_cluster: usize) -> Result<Self> {
        let cfg = ClusterConfig::new(scenario.total_users, users_per_cluster)?;
        Ok(Self {
            model: model.clone(),
            users_per_cluster,
            layout: scenario.layout(cfg.cluster_count)?,
            radio: scenario.radio(cfg.cluster_count)?,
            sampler: RequestSampler::new(model),
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.layout.cluster_count()
    }

    pub fn sampler(&self) -> &RequestSampler {
        &self.sampler
    }
}

/// Per-drop user counts and their empirical means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountStats {
    /// Fraction of Mode 1 drops.
    pub coop_prob: MeanSe,
    /// Clusters holding a Coop band, `B` in Mode 1 and 0 otherwise.
    pub active_coop: MeanSe,
    pub coop_users: MeanSe,
    pub ncoop_users: MeanSe,
    pub cellular_users: MeanSe,
}

/// User counts of one classified drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropCounts {
    pub mode1: bool,
    pub active_coop: usize,
    pub coop: usize,
    pub ncoop: usize,
    pub cellular: usize,
}

impl DropCounts {
    pub fn new(cls: &Classification, cluster_count: usize) -> Self {
        Self {
            mode1: cls.mode1(),
            active_coop: if cls.mode1() { cluster_count } else { 0 },
            coop: cls.coop_users,
            ncoop: cls.ncoop_users,
            cellular: cls.cellular_users,
        }
    }
}

impl CountStats {
    pub fn from_counts(counts: &[DropCounts]) -> Self {
        let col = |f: fn(&DropCounts) -> f64| MeanSe::from_samples(counts.iter().map(f));
        Self {
            coop_prob: col(|c| f64::from(u8::from(c.mode1))),
            active_coop: col(|c| c.active_coop as f64),
            coop_users: col(|c| c.coop as f64),
            ncoop_users: col(|c| c.ncoop as f64),
            cellular_users: col(|c| c.cellular as f64),
        }
    }
}

/// Everything measured on one drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropOutcome {
    pub counts: DropCounts,
    /// Slots that produced a rate sample.
    pub slots: usize,
    /// Slots lost to ill-conditioned Coop channels.
    pub excluded_slots: usize,
    pub zf_redraws: u64,
    /// Mean network throughput over the used slots, bits/s.
    pub throughput: f64,
    /// Mean bits/s delivered on the Coop band.
    pub coop_bits: f64,
    /// Mean bits/s delivered to the users served on the N-Coop band.
    pub ncoop_bits: f64,
    /// Users sharing the Coop band and the N-Coop band.
    pub coop_served: usize,
    pub ncoop_served: usize,
    pub coop_se_sum: f64,
    pub coop_links: usize,
    pub ncoop_se_sum: f64,
    pub ncoop_links: usize,
}

/// Sum spectral efficiency and link count of an N-Coop band.
fn ncoop_band<R: rand::Rng + ?Sized>(drop: &Drop, links: &[Link], radio: &RadioConfig, rng: &mut R) -> (f64, usize) {
    if links.is_empty() {
        return (0.0, 0);
    }
    let (tx, rx) = link_positions(drop, links);
    let gains = gain_matrix(&tx, &rx, radio);
    let fading = draw_fading(links.len(), rng);
    (sum_spectral_efficiency(&ncoop_sinr(&gains, &fading, radio)), links.len())
}

fn link_positions(drop: &Drop, links: &[Link]) -> (Vec<Point>, Vec<Point>) {
    let pos = |u: usize| (drop.users[u].x, drop.users[u].y);
    (
        links.iter().map(|l| pos(l.tx)).collect(),
        links.iter().map(|l| pos(l.rx)).collect(),
    )
}

/// Clusters of each reuse colour present, by ascending colour.
fn reuse_groups(layout: &ClusterLayout) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); 4];
    for c in 0..layout.cluster_count() {
        groups[layout.reuse_color(c)].push(c);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Simulates drop `index`.
pub fn simulate_drop(net: &Network, sim: &SimConfig, strategy: Strategy, index: usize) -> DropOutcome {
    let mut rng = drop_rng(sim.seed, index as u64);
    let drop = generate_drop(
        &net.layout,
        &net.model,
        &net.sampler,
        net.users_per_cluster,
        sim.placement,
        &mut rng,
    );
    let b = net.cluster_count();
    let cls = classify(&drop, sim.coop_min_clusters.unwrap_or(b));
    let counts = DropCounts::new(&cls, b);
    let cooperate = strategy == Strategy::Cooperative && sim.eta > 0.0;
    let coop_band = cooperate && cls.mode1();
    let w = net.radio.bandwidth_hz;
    let eta = sim.eta;

    let mut out = DropOutcome {
        counts,
        slots: 0,
        excluded_slots: 0,
        zf_redraws: 0,
        throughput: 0.0,
        coop_bits: 0.0,
        ncoop_bits: 0.0,
        coop_served: if cooperate { cls.coop_users } else { 0 },
        ncoop_served: if cooperate { cls.ncoop_users } else { cls.coop_users + cls.ncoop_users },
        coop_se_sum: 0.0,
        coop_links: 0,
        ncoop_se_sum: 0.0,
        ncoop_links: 0,
    };
    let colours = if strategy == Strategy::Tdma { reuse_groups(&net.layout) } else { Vec::new() };
    let d2d = |u: usize| cls.labels[u] != UserClass::Cellular;

    for _ in 0..sim.fading_draws {
        if strategy == Strategy::Tdma {
            let mut bits = 0.0;
            for clusters in &colours {
                let links = schedule_ncoop(&drop, clusters, d2d, &mut rng);
                let (se, n) = ncoop_band(&drop, &links, &net.radio, &mut rng);
                out.ncoop_se_sum += se;
                out.ncoop_links += n;
                bits += w * se;
            }
            let slot = bits / colours.len() as f64;
            out.throughput += slot;
            out.ncoop_bits += slot;
            out.slots += 1;
            continue;
        }

        let s = schedule(&drop, &cls, cooperate, &mut rng);
        let mut coop_se = 0.0;
        if coop_band && !s.coop.is_empty() {
            let (tx, rx) = link_positions(&drop, &s.coop);
            let gains = gain_matrix(&tx, &rx, &net.radio);
            let draw = coop_sinr(&gains, sim.coop_mode, &net.radio, &mut rng);
            out.zf_redraws += u64::from(draw.redraws);
            match draw.sinr {
                Some(sinr) => {
                    coop_se = sum_spectral_efficiency(&sinr);
                    out.coop_se_sum += coop_se;
                    out.coop_links += s.coop.len();
                }
                None => {
                    out.excluded_slots += 1;
                    continue;
                }
            }
        }
        let (ncoop_se, n) = ncoop_band(&drop, &s.ncoop, &net.radio, &mut rng);
        out.ncoop_se_sum += ncoop_se;
        out.ncoop_links += n;
        let (coop_bits, ncoop_bits) = if coop_band {
            (w * eta * coop_se, w * (1.0 - eta) * ncoop_se)
        } else {
            (0.0, w * ncoop_se)
        };
        out.coop_bits += coop_bits;
        out.ncoop_bits += ncoop_bits;
        out.throughput += coop_bits + ncoop_bits;
        out.slots += 1;
    }
    if out.slots > 0 {
        let n = out.slots as f64;
        out.throughput /= n;
        out.coop_bits /= n;
        out.ncoop_bits /= n;
    }
    out
}

/// Aggregated results of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub strategy: Strategy,
    pub users_per_cluster: usize,
    pub cluster_count: usize,
    pub eta: f64,
    pub drops: usize,
    pub fading_draws: usize,
    pub coop_min_clusters: Option<usize>,
    /// Network throughput in bits/s.
    pub throughput: Estimate,
    /// Bits/s per Coop user: Coop-band bits over Coop users, summed over drops.
    pub coop_user_rate: Option<f64>,
    /// Bits/s per user served on the N-Coop band, same ratio-of-sums form.
    pub ncoop_user_rate: Option<f64>,
    pub counts: CountStats,
    /// Mean `log2(1 + SINR)` per scheduled link.
    pub coop_se: Option<f64>,
    pub ncoop_se: Option<f64>,
    pub zf_redraws: u64,
    pub excluded_slots: u64,
    /// Drops without a single usable slot.
    pub excluded_drops: usize,
    pub baseline_eta0: Option<Estimate>,
    pub baseline_tdma: Option<Estimate>,
    pub notes: Vec<String>,
}

impl SimReport {
    fn from_outcomes(net: &Network, sim: &SimConfig, strategy: Strategy, outcomes: &[DropOutcome]) -> Self {
        let counts: Vec<DropCounts> = outcomes.iter().map(|o| o.counts).collect();
        let used: Vec<&DropOutcome> = outcomes.iter().filter(|o| o.slots > 0).collect();
        let throughput: Vec<f64> = used.iter().map(|o| o.throughput).collect();
        let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
        let coop_user_rate = ratio(
            used.iter().map(|o| o.coop_bits).sum(),
            used.iter().filter(|o| o.counts.mode1).map(|o| o.coop_served as f64).sum(),
        );
        let ncoop_user_rate = ratio(
            used.iter().map(|o| o.ncoop_bits).sum(),
            used.iter().map(|o| o.ncoop_served as f64).sum(),
        );
        let coop_links: usize = outcomes.iter().map(|o| o.coop_links).sum();
        let ncoop_links: usize = outcomes.iter().map(|o| o.ncoop_links).sum();
        let mut notes = Vec::new();
        if sim.coop_min_clusters.is_some() && strategy == Strategy::Cooperative {
            notes.push("partial cooperation: clusters outside the cooperating set are silent on the Coop band".into());
        }
        Self {
            strategy,
            users_per_cluster: net.users_per_cluster,
            cluster_count: net.cluster_count(),
            eta: sim.eta,
            drops: sim.drops,
            fading_draws: sim.fading_draws,
            coop_min_clusters: sim.coop_min_clusters,
            throughput: batch_means(&throughput, sim.batches.max(MIN_BATCHES)),
            coop_user_rate,
            ncoop_user_rate,
            counts: CountStats::from_counts(&counts),
            coop_se: ratio(outcomes.iter().map(|o| o.coop_se_sum).sum(), coop_links as f64),
            ncoop_se: ratio(outcomes.iter().map(|o| o.ncoop_se_sum).sum(), ncoop_links as f64),
            zf_redraws: outcomes.iter().map(|o| o.zf_redraws).sum(),
            excluded_slots: outcomes.iter().map(|o| o.excluded_slots as u64).sum(),
            excluded_drops: outcomes.len() - used.len(),
            baseline_eta0: None,
            baseline_tdma: None,
            notes,
        }
    }

    /// Throughput relative to the `eta = 0` baseline, when it was run.
    pub fn gain_over_eta0(&self) -> Option<f64> {
        self.baseline_eta0.map(|b| self.throughput.mean / b.mean)
    }
}

/// Per-drop outcomes in drop order.
pub fn simulate_drops(net: &Network, sim: &SimConfig, strategy: Strategy) -> Result<Vec<DropOutcome>> {
    sim.validate(net.cluster_count())?;
    Ok((0..sim.drops)
        .into_par_iter()
        .map(|i| simulate_drop(net, sim, strategy, i))
        .collect())
}

fn run_strategy(net: &Network, sim: &SimConfig, strategy: Strategy) -> Result<SimReport> {
    let outcomes = simulate_drops(net, sim, strategy)?;
    Ok(SimReport::from_outcomes(net, sim, strategy, &outcomes))
}

/// The cooperative strategy at `sim.eta`. `eta = 0` disables cooperation
/// and is the `eta = 0` baseline.
pub fn run(net: &Network, sim: &SimConfig) -> Result<SimReport> {
    run_strategy(net, sim, Strategy::Cooperative)
}

/// All D2D users on a single band without coordination.
pub fn run_baseline_eta0(net: &Network, sim: &SimConfig) -> Result<SimReport> {
    run_strategy(net, sim, Strategy::Eta0)
}

/// One reuse colour active per slot, averaged over the colour cycle.
pub fn run_baseline_tdma(net: &Network, sim: &SimConfig) -> Result<SimReport> {
    run_strategy(net, sim, Strategy::Tdma)
}

/// Cooperation among every set of at least `coop_min_clusters` clusters
/// hitting a group.
pub fn run_partial_coop(net: &Network, sim: &SimConfig, coop_min_clusters: usize) -> Result<SimReport> {
    let sim = SimConfig {
        coop_min_clusters: Some(coop_min_clusters),
        ..*sim
    };
    run_strategy(net, &sim, Strategy::Cooperative)
}

/// The configured strategy plus both baselines on the same drops.
pub fn run_with_baselines(net: &Network, sim: &SimConfig) -> Result<SimReport> {
    let mut report = run(net, sim)?;
    let base = SimConfig {
        coop_min_clusters: None,
        ..*sim
    };
    report.baseline_eta0 = Some(run_baseline_eta0(net, &base)?.throughput);
    report.baseline_tdma = Some(run_baseline_tdma(net, &base)?.throughput);
    Ok(report)
}
