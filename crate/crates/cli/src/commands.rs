//! Subcommands. Each returns a table plus an exit status.

use d2d_coopnet::linkrates::{network_throughput, prop4_condition, user_rates, UserRate};
use d2d_coopnet::montecarlo::{run_with_baselines, Network};
use d2d_coopnet::optimizer::{candidate_cluster_sizes, evaluate_k, optimize_with, EtaChoice, KEvaluation};

use crate::config::{ConfigError, SystemConfig, KEYS};
use crate::table::{fmt_g9, fmt_opt, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] d2d_coopnet::Error),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Infeasible,
    ValidationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Infeasible => 3,
            Status::ValidationFailed => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub status: Status,
    pub warnings: Vec<String>,
}

pub const ANALYZE_HEADER: &[&str] = &[
    "beta",
    "K",
    "B",
    "pc",
    "na_avg",
    "nc_avg",
    "nn_avg",
    "n_cellular_avg",
    "occupancy",
    "rn_se",
    "rc_se",
    "prop4",
    "eta_lower",
    "eta_upper",
    "eta",
    "feasible",
    "throughput_bps",
    "coop_user_rate_bps",
    "ncoop_user_rate_bps",
];

pub const SIMULATE_HEADER: &[&str] = &[
    "beta",
    "K",
    "B",
    "eta",
    "pc_analytic",
    "pc_sim",
    "na_avg",
    "nc_analytic",
    "nc_sim",
    "nn_analytic",
    "nn_sim",
    "nb_analytic",
    "nb_sim",
    "throughput_analytic_bps",
    "throughput_sim_bps",
    "throughput_ci_bps",
    "coop_user_rate_bps",
    "ncoop_user_rate_bps",
    "baseline_eta0_bps",
    "baseline_tdma_bps",
];

fn rate_cell(r: UserRate) -> String {
    match r {
        UserRate::Rate(x) => fmt_g9(x),
        UserRate::NoUsers => String::new(),
    }
}

pub fn evaluate(cfg: &SystemConfig, k: usize) -> Result<KEvaluation, CliError> {
    Ok(evaluate_k(
        k,
        &cfg.model()?,
        &cfg.scenario(),
        cfg.rate_floor_bps,
        cfg.optimizer_options(),
    )?)
}

/// Analytic throughput and user rates of `ev` at an arbitrary split.
pub fn analytic_at(cfg: &SystemConfig, ev: &KEvaluation, eta: f64) -> Result<(f64, UserRate, UserRate), CliError> {
    let radio = cfg.scenario().radio(ev.cluster_count)?;
    let rn = ev.effective_ncoop_se();
    let rc = ev.rates.coop_se;
    let users = user_rates(&radio, eta, ev.counts.coop, ev.counts.ncoop, rc, rn);
    Ok((network_throughput(&radio, eta, ev.coop_prob, rc, rn), users.coop, users.ncoop))
}

fn k_row(cfg: &SystemConfig, ev: &KEvaluation, eta_override: Option<f64>) -> Result<Vec<String>, CliError> {
    let radio = cfg.scenario().radio(ev.cluster_count)?;
    let (lower, upper) = ev.choice.bounds();
    let eta = eta_override.or(ev.eta());
    let (throughput, coop, ncoop) = match eta_override {
        Some(e) => analytic_at(cfg, ev, e)?,
        None => (ev.throughput, ev.coop_user_rate, ev.ncoop_user_rate),
    };
    let feasible = match eta_override {
        Some(_) => coop.meets(cfg.rate_floor_bps) && ncoop.meets(cfg.rate_floor_bps),
        None => matches!(ev.choice, EtaChoice::Feasible { .. }),
    };
    Ok(vec![
        fmt_g9(cfg.zipf_beta),
        ev.users_per_cluster.to_string(),
        ev.cluster_count.to_string(),
        fmt_g9(ev.coop_prob),
        fmt_g9(ev.coop_prob * ev.cluster_count as f64),
        fmt_g9(ev.counts.coop),
        fmt_g9(ev.counts.ncoop),
        fmt_g9(ev.counts.cellular),
        fmt_g9(ev.occupancy),
        fmt_g9(ev.rates.ncoop_se),
        fmt_g9(ev.rates.coop_se),
        prop4_condition(&radio)?.to_string(),
        fmt_g9(lower),
        fmt_g9(upper),
        fmt_opt(eta),
        feasible.to_string(),
        fmt_g9(throughput),
        rate_cell(coop),
        rate_cell(ncoop),
    ])
}

fn sizes(cfg: &SystemConfig) -> Vec<usize> {
    match cfg.users_per_cluster {
        Some(k) => vec![k],
        None => candidate_cluster_sizes(cfg.num_users, cfg.catalog_size / cfg.cache_size),
    }
}

/// Closed-form quantities for the configured `K`, or for every candidate.
pub fn analyze(cfg: &SystemConfig) -> Result<Report, CliError> {
    let mut table = Table::new(ANALYZE_HEADER);
    let mut any_feasible = false;
    for k in sizes(cfg) {
        let ev = evaluate(cfg, k)?;
        let row = k_row(cfg, &ev, cfg.eta)?;
        any_feasible |= row[15] == "true";
        table.push(row);
    }
    let mut warnings = Vec::new();
    if !any_feasible {
        warnings.push(format!("no cluster size meets the {} bps rate floor", cfg.rate_floor_bps));
    }
    Ok(Report {
        table,
        status: Status::Ok,
        warnings,
    })
}

/// The per-`K` table at each `eta*`, with the optimum flagged.
pub fn optimize(cfg: &SystemConfig) -> Result<Report, CliError> {
    let result = optimize_with(&cfg.model()?, &cfg.scenario(), cfg.rate_floor_bps, cfg.optimizer_options())?;
    let mut header = ANALYZE_HEADER.to_vec();
    header.push("best");
    let mut table = Table::new(&header);
    for (i, ev) in result.per_k.iter().enumerate() {
        let mut row = k_row(cfg, ev, None)?;
        row.push((result.best == Some(i)).to_string());
        table.push(row);
    }
    let (status, warnings) = if result.is_feasible() {
        (Status::Ok, Vec::new())
    } else {
        (
            Status::Infeasible,
            vec![format!("no cluster size meets the {} bps rate floor", cfg.rate_floor_bps)],
        )
    };
    Ok(Report { table, status, warnings })
}

/// Configured `K`, or the optimizer's choice.
pub fn resolve_k(cfg: &SystemConfig) -> Result<usize, CliError> {
    if let Some(k) = cfg.users_per_cluster {
        return Ok(k);
    }
    let result = optimize_with(&cfg.model()?, &cfg.scenario(), cfg.rate_floor_bps, cfg.optimizer_options())?;
    result.best_k().ok_or_else(|| {
        CliError::Infeasible(format!(
            "no cluster size meets the {} bps rate floor",
            cfg.rate_floor_bps
        ))
    })
}

/// One simulate row plus warnings.
pub fn simulate_row(cfg: &SystemConfig) -> Result<(Vec<String>, Vec<String>), CliError> {
    let k = resolve_k(cfg)?;
    let ev = evaluate(cfg, k)?;
    let eta = match cfg.eta {
        Some(e) => e,
        None => ev
            .eta()
            .ok_or_else(|| CliError::Infeasible(format!("no feasible eta for K = {k}")))?,
    };
    let model = cfg.model()?;
    let net = Network::new(&model, &cfg.scenario(), k)?;
    let report = run_with_baselines(&net, &cfg.sim_config(eta))?;
    let (throughput, _, _) = analytic_at(cfg, &ev, eta)?;

    let mut warnings = report.notes.clone();
    if report.excluded_slots > 0 {
        warnings.push(format!(
            "{} Coop slot(s) excluded after {} ill-conditioned redraws",
            report.excluded_slots, report.zf_redraws
        ));
    }
    if report.excluded_drops > 0 {
        warnings.push(format!("{} drop(s) had no usable slot", report.excluded_drops));
    }
    let c = &report.counts;
    let row = vec![
        fmt_g9(cfg.zipf_beta),
        k.to_string(),
        ev.cluster_count.to_string(),
        fmt_g9(eta),
        fmt_g9(ev.coop_prob),
        fmt_g9(c.coop_prob.mean),
        fmt_g9(c.active_coop.mean),
        fmt_g9(ev.counts.coop),
        fmt_g9(c.coop_users.mean),
        fmt_g9(ev.counts.ncoop),
        fmt_g9(c.ncoop_users.mean),
        fmt_g9(ev.counts.cellular),
        fmt_g9(c.cellular_users.mean),
        fmt_g9(throughput),
        fmt_g9(report.throughput.mean),
        fmt_g9(report.throughput.ci_half_width),
        fmt_opt(report.coop_user_rate),
        fmt_opt(report.ncoop_user_rate),
        fmt_opt(report.baseline_eta0.map(|b| b.mean)),
        fmt_opt(report.baseline_tdma.map(|b| b.mean)),
    ];
    Ok((row, warnings))
}

/// Simulate-schema row with only the analytic columns that do not depend
/// on `eta` filled (all blank but `beta` when no `K` is available).
fn infeasible_row(cfg: &SystemConfig) -> Result<Vec<String>, CliError> {
    let mut row = vec![String::new(); SIMULATE_HEADER.len()];
    row[0] = fmt_g9(cfg.zipf_beta);
    let Ok(k) = resolve_k(cfg) else {
        return Ok(row);
    };
    let ev = evaluate(cfg, k)?;
    row[1] = k.to_string();
    row[2] = ev.cluster_count.to_string();
    row[4] = fmt_g9(ev.coop_prob);
    row[7] = fmt_g9(ev.counts.coop);
    row[9] = fmt_g9(ev.counts.ncoop);
    row[11] = fmt_g9(ev.counts.cellular);
    Ok(row)
}

pub fn simulate(cfg: &SystemConfig) -> Result<Report, CliError> {
    let (row, warnings) = simulate_row(cfg)?;
    let mut table = Table::new(SIMULATE_HEADER);
    table.push(row);
    Ok(Report {
        table,
        status: Status::Ok,
        warnings,
    })
}

/// One simulate row per value of `key`. Sweeping `num_users` lets the
/// optimizer pick `K` for every value.
pub fn sweep(cfg: &SystemConfig, key: &str, values: &[String]) -> Result<Report, CliError> {
    if !KEYS.contains(&key) {
        return Err(ConfigError::Invalid(format!("--sweep-key: unknown key `{key}`")).into());
    }
    if values.is_empty() {
        return Err(ConfigError::Invalid("--values: at least one value is required".into()).into());
    }
    let mut header = vec![key];
    header.extend_from_slice(SIMULATE_HEADER);
    let mut table = Table::new(&header);
    let mut status = Status::Ok;
    let mut warnings = Vec::new();
    for v in values {
        let v = v.trim();
        let mut c = cfg.clone();
        c.set(key, v)
            .map_err(|msg| ConfigError::Invalid(format!("--values {v}: {msg}")))?;
        if key == "num_users" {
            c.users_per_cluster = None;
        }
        c.validate()
            .map_err(|(_, msg)| ConfigError::Invalid(format!("--values {v}: {msg}")))?;
        let mut row = vec![v.to_string()];
        match simulate_row(&c) {
            Ok((cells, w)) => {
                row.extend(cells);
                warnings.extend(w.into_iter().map(|w| format!("{key} = {v}: {w}")));
            }
            Err(CliError::Infeasible(msg)) => {
                status = Status::Infeasible;
                warnings.push(format!("{key} = {v}: infeasible: {msg}"));
                row.extend(infeasible_row(&c)?);
            }
            Err(e) => return Err(e),
        }
        table.push(row);
    }
    Ok(Report { table, status, warnings })
}
