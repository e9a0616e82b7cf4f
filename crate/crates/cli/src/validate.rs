//! Closed forms against Monte Carlo and brute-force oracles.

use d2d_coopnet::counting::{enumerate_avg_coop, exact_avg_coop, CoopCountMethod, UserCounts};
use d2d_coopnet::geometry::{ks_distance, CdfTable, LinkDistance};
use d2d_coopnet::linkrates::{network_throughput, user_rates, LinkRates, PathLoss};
use d2d_coopnet::montecarlo::{drop_rng, estimate_link_efficiency, request_statistics};
use d2d_coopnet::optimizer::{candidate_cluster_sizes, KEvaluation};
use d2d_coopnet::popularity::{ClusterConfig, PopularityModel};
use d2d_coopnet::quadrature::integrate;

use crate::commands::{evaluate, resolve_k, CliError, Report, Status};
use crate::config::SystemConfig;
use crate::table::{fmt_g9, Table};

pub const HEADER: &[&str] = &["check_name", "analytic", "simulated", "tolerance", "pass"];

/// Distance samples per goodness-of-fit check.
pub const KS_SAMPLES: usize = 200_000;
pub const KS_TOLERANCE: f64 = 0.01;
pub const PDF_MASS_TOLERANCE: f64 = 1e-6;
/// Request draws per `(beta, K)` count check.
pub const COUNT_DRAWS: usize = 10_000;
/// Count checks pass within this many standard errors. The standard error
/// is floored at one draw's resolution so that events too rare to appear
/// in the sample do not fail on a zero-width band.
pub const COUNT_SIGMAS: f64 = 4.0;
pub const RATE_REL_TOLERANCE: f64 = 0.15;
pub const ETA_GRID_STEP: f64 = 1e-4;
pub const ETA_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub simulated: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn absolute(name: impl Into<String>, analytic: f64, simulated: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            analytic,
            simulated,
            tolerance,
            pass: (analytic - simulated).abs() <= tolerance,
        }
    }

    fn relative(name: impl Into<String>, analytic: f64, simulated: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            analytic,
            simulated,
            tolerance,
            pass: (simulated / analytic - 1.0).abs() <= tolerance,
        }
    }
}

fn pdf_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for (label, dist) in [("intra", LinkDistance::Intra), ("inter", LinkDistance::Inter)] {
        let mass = integrate(|r| dist.pdf(r), 0.0, dist.support(), dist.breakpoints(), 1e-12)?.value;
        out.push(Check::absolute(format!("{label}_pdf_mass"), 1.0, mass, PDF_MASS_TOLERANCE));
        let mut rng = drop_rng(seed, 0);
        let mut samples: Vec<f64> = (0..KS_SAMPLES).map(|_| dist.sample(&mut rng)).collect();
        let ks = ks_distance(&mut samples, &CdfTable::new(dist, 4096)?);
        out.push(Check::absolute(format!("{label}_pdf_ks"), 0.0, ks, KS_TOLERANCE));
    }
    Ok(out)
}

fn count_checks(cfg: &SystemConfig) -> Result<Vec<Check>, CliError> {
    let groups = cfg.catalog_size / cfg.cache_size;
    let ks: Vec<usize> = match cfg.users_per_cluster {
        Some(k) => vec![k],
        None => candidate_cluster_sizes(cfg.num_users, groups)
            .into_iter()
            .filter(|k| [2, 5, 10, 15].contains(k))
            .collect(),
    };
    let mut out = Vec::new();
    for beta in [0.0, 0.5, 1.0] {
        let model = PopularityModel::new(cfg.catalog_size, cfg.cache_size, beta)?;
        for &k in &ks {
            let cc = ClusterConfig::new(cfg.num_users, k)?;
            let s = request_statistics(&model, &cc, None, COUNT_DRAWS, cfg.seed)?;
            let counts = UserCounts::evaluate(&cc, &model, CoopCountMethod::Exact)?;
            let tag = format!("beta{}_K{k}", fmt_g9(beta));
            let m = cfg.num_users as f64;
            for (name, analytic, est, scale) in [
                ("pc", model.coop_prob(&cc)?, s.coop_prob, 1.0),
                ("nc", counts.coop, s.coop_users, m),
                ("nn", counts.ncoop, s.ncoop_users, m),
                ("nb", counts.cellular, s.cellular_users, m),
            ] {
                let se = est.std_error.max(scale / COUNT_DRAWS as f64);
                out.push(Check::absolute(format!("{name}_{tag}"), analytic, est.mean, COUNT_SIGMAS * se));
            }
        }
    }
    Ok(out)
}

fn enumeration_check(beta: f64) -> Result<Check, CliError> {
    let model = PopularityModel::new(4, 1, beta)?;
    let cc = ClusterConfig::new(6, 2)?;
    let exact = exact_avg_coop(&cc, &model)?;
    let brute = enumerate_avg_coop(&cc, &model, 1e6)?;
    Ok(Check::absolute("nc_enumeration_B3_K2", exact, brute, 1e-9))
}

fn rate_checks(cfg: &SystemConfig, b: usize) -> Result<Vec<Check>, CliError> {
    let scenario = cfg.scenario().with_path_loss(PathLoss::power_law(cfg.alpha));
    let radio = scenario.radio(b)?;
    let analytic = LinkRates::evaluate(&radio)?;
    let samples = cfg.drops * cfg.fading_draws;
    let mc = estimate_link_efficiency(&scenario.layout(b)?, &radio, samples, cfg.seed)?;
    Ok(vec![
        Check::relative("ncoop_se_rel", analytic.ncoop_se, mc.ncoop.mean, RATE_REL_TOLERANCE),
        Check::relative("coop_se_approx_rel", analytic.coop_se, mc.coop_approx.mean, RATE_REL_TOLERANCE),
    ])
}

/// Throughput-maximizing `eta` on a uniform grid under both rate floors.
pub fn grid_eta(cfg: &SystemConfig, ev: &KEvaluation, step: f64) -> Result<Option<f64>, CliError> {
    let radio = cfg.scenario().radio(ev.cluster_count)?;
    let rn = ev.effective_ncoop_se();
    let rc = ev.rates.coop_se;
    let n = (1.0 / step).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=n {
        let eta = i as f64 * step;
        let u = user_rates(&radio, eta, ev.counts.coop, ev.counts.ncoop, rc, rn);
        if !(u.coop.meets(cfg.rate_floor_bps) && u.ncoop.meets(cfg.rate_floor_bps)) {
            continue;
        }
        let t = network_throughput(&radio, eta, ev.coop_prob, rc, rn);
        if best.is_none_or(|(_, bt)| t > bt) {
            best = Some((eta, t));
        }
    }
    Ok(best.map(|(eta, _)| eta))
}

pub fn validate(cfg: &SystemConfig) -> Result<Report, CliError> {
    let mut checks = pdf_checks(cfg.seed)?;
    checks.extend(count_checks(cfg)?);
    checks.push(enumeration_check(cfg.zipf_beta)?);

    let mut warnings = Vec::new();
    match resolve_k(cfg) {
        Ok(k) => {
            let ev = evaluate(cfg, k)?;
            checks.extend(rate_checks(cfg, ev.cluster_count)?);
            match (ev.eta(), grid_eta(cfg, &ev, ETA_GRID_STEP)?) {
                (Some(closed), Some(grid)) => {
                    checks.push(Check::absolute(format!("eta_star_K{k}"), closed, grid, ETA_TOLERANCE))
                }
                (None, None) => warnings.push(format!("K = {k} is infeasible; eta check skipped")),
                (closed, grid) => checks.push(Check {
                    name: format!("eta_star_K{k}"),
                    analytic: closed.unwrap_or(f64::NAN),
                    simulated: grid.unwrap_or(f64::NAN),
                    tolerance: ETA_TOLERANCE,
                    pass: false,
                }),
            }
        }
        Err(CliError::Infeasible(msg)) => warnings.push(format!("rate and eta checks skipped: {msg}")),
        Err(e) => return Err(e),
    }

    let mut table = Table::new(HEADER);
    for c in &checks {
        table.push(vec![
            c.name.clone(),
            fmt_g9(c.analytic),
            fmt_g9(c.simulated),
            fmt_g9(c.tolerance),
            c.pass.to_string(),
        ]);
    }
    let status = if checks.iter().all(|c| c.pass) {
        Status::Ok
    } else {
        Status::ValidationFailed
    };
    Ok(Report { table, status, warnings })
}
