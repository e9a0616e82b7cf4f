//! `key = value` system configuration.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use d2d_coopnet::linkrates::PathLoss;
use d2d_coopnet::montecarlo::{CoopSinrMode, Placement, SimConfig, MIN_BATCHES};
use d2d_coopnet::optimizer::{Objective, OptimizerOptions};
use d2d_coopnet::popularity::PopularityModel;
use d2d_coopnet::scenario::{dbm_to_watts, Scenario, DEFAULT_NEIGHBORS};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("missing required key(s): {missing}; defaults applied: {defaults}")]
    Missing { missing: String, defaults: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLossKind {
    PowerLaw,
    LogDistance,
}

impl PathLossKind {
    fn name(self) -> &'static str {
        match self {
            PathLossKind::PowerLaw => "powerlaw",
            PathLossKind::LogDistance => "logdistance",
        }
    }
}

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub side_length_m: f64,
    pub num_users: usize,
    /// `None` lets the optimizer choose.
    pub users_per_cluster: Option<usize>,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub pathloss: PathLossKind,
    /// Exponent of the power-law model.
    pub alpha: f64,
    pub min_distance_m: f64,
    pub catalog_size: usize,
    pub cache_size: usize,
    pub zipf_beta: f64,
    pub rate_floor_bps: f64,
    /// `None` uses the optimal split.
    pub eta: Option<f64>,
    pub drops: usize,
    pub fading_draws: usize,
    pub seed: u64,
    pub coop_min_clusters: Option<usize>,
    pub coop_sinr_mode: CoopSinrMode,
    pub placement: Placement,
    pub objective: Objective,
}

/// Keys in emission order.
pub const KEYS: &[&str] = &[
    "side_length_m",
    "num_users",
    "users_per_cluster",
    "bandwidth_hz",
    "tx_power_dbm",
    "noise_dbm",
    "pathloss",
    "alpha",
    "min_distance_m",
    "catalog_size",
    "cache_size",
    "zipf_beta",
    "rate_floor_bps",
    "eta",
    "drops",
    "fading_draws",
    "seed",
    "coop_min_clusters",
    "coop_sinr_mode",
    "placement",
    "objective",
];

pub const REQUIRED: &[&str] = &["side_length_m", "num_users", "catalog_size", "cache_size", "zipf_beta"];

const OPTIONAL_NO_DEFAULT: &[&str] = &["users_per_cluster", "eta", "coop_min_clusters"];

fn parse_f64(key: &str, v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{key}: expected a finite number, got `{v}`")),
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("{key}: expected a non-negative integer, got `{v}`"))
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

impl SystemConfig {
    /// 100 m hotspot, 180 users, 20 MHz, 23 dBm, -100 dBm, log-distance
    /// path loss, 300 files, 10 per cache, `beta = 1`, 1 Mbps floor.
    pub fn hotspot_defaults() -> Self {
        Self {
            side_length_m: 100.0,
            num_users: 180,
            users_per_cluster: None,
            bandwidth_hz: 2e7,
            tx_power_dbm: 23.0,
            noise_dbm: -100.0,
            pathloss: PathLossKind::LogDistance,
            alpha: 3.0,
            min_distance_m: 1.0,
            catalog_size: 300,
            cache_size: 10,
            zipf_beta: 1.0,
            rate_floor_bps: 1e6,
            eta: None,
            drops: 1000,
            fading_draws: 10,
            seed: 1,
            coop_min_clusters: None,
            coop_sinr_mode: CoopSinrMode::ZfExact,
            placement: Placement::PerCell,
            objective: Objective::Occupied,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::hotspot_defaults();
        let mut lines: HashMap<&str, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Line {
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::Line {
                    line,
                    msg: format!("unknown key `{key}`"),
                });
            };
            if value.is_empty() {
                return Err(ConfigError::Line {
                    line,
                    msg: format!("{key}: missing value"),
                });
            }
            if let Some(first) = lines.insert(known, line) {
                return Err(ConfigError::Line {
                    line,
                    msg: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            cfg.set(key, value).map_err(|msg| ConfigError::Line { line, msg })?;
        }

        let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !lines.contains_key(k)).collect();
        if !missing.is_empty() {
            let defaults = Self::hotspot_defaults();
            let applied: Vec<String> = KEYS
                .iter()
                .filter(|k| !REQUIRED.contains(k) && !OPTIONAL_NO_DEFAULT.contains(k) && !lines.contains_key(*k))
                .map(|k| format!("{k} = {}", defaults.value_of(k).unwrap_or_default()))
                .collect();
            return Err(ConfigError::Missing {
                missing: missing.join(", "),
                defaults: if applied.is_empty() { "none".into() } else { applied.join(", ") },
            });
        }

        if let Err((key, msg)) = cfg.validate() {
            return Err(match lines.get(key) {
                Some(&line) => ConfigError::Line { line, msg },
                None => ConfigError::Invalid(msg),
            });
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value (no cross-key validation).
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "side_length_m" => self.side_length_m = parse_f64(key, v)?,
            "num_users" => self.num_users = parse_usize(key, v)?,
            "users_per_cluster" => self.users_per_cluster = Some(parse_usize(key, v)?),
            "bandwidth_hz" => self.bandwidth_hz = parse_f64(key, v)?,
            "tx_power_dbm" => self.tx_power_dbm = parse_f64(key, v)?,
            "noise_dbm" => self.noise_dbm = parse_f64(key, v)?,
            "pathloss" => {
                self.pathloss = match v {
                    "powerlaw" => PathLossKind::PowerLaw,
                    "logdistance" => PathLossKind::LogDistance,
                    _ => return Err(format!("pathloss: expected powerlaw or logdistance, got `{v}`")),
                }
            }
            "alpha" => self.alpha = parse_f64(key, v)?,
            "min_distance_m" => self.min_distance_m = parse_f64(key, v)?,
            "catalog_size" => self.catalog_size = parse_usize(key, v)?,
            "cache_size" => self.cache_size = parse_usize(key, v)?,
            "zipf_beta" => self.zipf_beta = parse_f64(key, v)?,
            "rate_floor_bps" => self.rate_floor_bps = parse_f64(key, v)?,
            "eta" => self.eta = Some(parse_f64(key, v)?),
            "drops" => self.drops = parse_usize(key, v)?,
            "fading_draws" => self.fading_draws = parse_usize(key, v)?,
            "seed" => {
                self.seed = v
                    .parse::<u64>()
                    .map_err(|_| format!("seed: expected an unsigned integer, got `{v}`"))?
            }
            "coop_min_clusters" => self.coop_min_clusters = Some(parse_usize(key, v)?),
            "coop_sinr_mode" => {
                self.coop_sinr_mode = match v {
                    "zf-exact" => CoopSinrMode::ZfExact,
                    "paper-approx" => CoopSinrMode::Approx,
                    _ => return Err(format!("coop_sinr_mode: expected zf-exact or paper-approx, got `{v}`")),
                }
            }
            "placement" => {
                self.placement = match v {
                    "per-cell" => Placement::PerCell,
                    "uniform" => Placement::Uniform,
                    _ => return Err(format!("placement: expected per-cell or uniform, got `{v}`")),
                }
            }
            "objective" => {
                self.objective = match v {
                    "occupied" => Objective::Occupied,
                    "nominal" => Objective::Nominal,
                    _ => return Err(format!("objective: expected occupied or nominal, got `{v}`")),
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Textual value of `key`, `None` for an unset optional key.
    pub fn value_of(&self, key: &str) -> Option<String> {
        Some(match key {
            "side_length_m" => fmt_f64(self.side_length_m),
            "num_users" => self.num_users.to_string(),
            "users_per_cluster" => self.users_per_cluster?.to_string(),
            "bandwidth_hz" => fmt_f64(self.bandwidth_hz),
            "tx_power_dbm" => fmt_f64(self.tx_power_dbm),
            "noise_dbm" => fmt_f64(self.noise_dbm),
            "pathloss" => self.pathloss.name().to_string(),
            "alpha" => fmt_f64(self.alpha),
            "min_distance_m" => fmt_f64(self.min_distance_m),
            "catalog_size" => self.catalog_size.to_string(),
            "cache_size" => self.cache_size.to_string(),
            "zipf_beta" => fmt_f64(self.zipf_beta),
            "rate_floor_bps" => fmt_f64(self.rate_floor_bps),
            "eta" => fmt_f64(self.eta?),
            "drops" => self.drops.to_string(),
            "fading_draws" => self.fading_draws.to_string(),
            "seed" => self.seed.to_string(),
            "coop_min_clusters" => self.coop_min_clusters?.to_string(),
            "coop_sinr_mode" => match self.coop_sinr_mode {
                CoopSinrMode::ZfExact => "zf-exact",
                CoopSinrMode::Approx => "paper-approx",
            }
            .to_string(),
            "placement" => match self.placement {
                Placement::PerCell => "per-cell",
                Placement::Uniform => "uniform",
            }
            .to_string(),
            "objective" => match self.objective {
                Objective::Occupied => "occupied",
                Objective::Nominal => "nominal",
            }
            .to_string(),
            _ => return None,
        })
    }

    /// Config file text; `parse_str(emit())` gives back `self`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.value_of(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    /// Cross-key checks. The error names the key to blame.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let positive = |key: &'static str, x: f64| {
            if x > 0.0 {
                Ok(())
            } else {
                Err((key, format!("{key} = {x} must be > 0")))
            }
        };
        positive("side_length_m", self.side_length_m)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("alpha", self.alpha)?;
        positive("min_distance_m", self.min_distance_m)?;
        if self.num_users == 0 {
            return Err(("num_users", "num_users must be >= 1".into()));
        }
        if self.catalog_size == 0 {
            return Err(("catalog_size", "catalog_size must be >= 1".into()));
        }
        if self.cache_size == 0 || !self.catalog_size.is_multiple_of(self.cache_size) {
            return Err((
                "cache_size",
                format!(
                    "cache_size = {} must be >= 1 and divide catalog_size = {}",
                    self.cache_size, self.catalog_size
                ),
            ));
        }
        if self.zipf_beta < 0.0 {
            return Err(("zipf_beta", format!("zipf_beta = {} must be >= 0", self.zipf_beta)));
        }
        if self.rate_floor_bps < 0.0 {
            return Err(("rate_floor_bps", format!("rate_floor_bps = {} must be >= 0", self.rate_floor_bps)));
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(("eta", format!("eta = {eta} must lie in [0, 1]")));
            }
        }
        if self.drops == 0 {
            return Err(("drops", "drops must be >= 1".into()));
        }
        if self.fading_draws == 0 {
            return Err(("fading_draws", "fading_draws must be >= 1".into()));
        }
        let groups = self.catalog_size / self.cache_size;
        if let Some(k) = self.users_per_cluster {
            if k == 0 || !self.num_users.is_multiple_of(k) {
                return Err((
                    "users_per_cluster",
                    format!("users_per_cluster = {k} must be >= 1 and divide num_users = {}", self.num_users),
                ));
            }
            if k > groups {
                return Err((
                    "users_per_cluster",
                    format!("users_per_cluster = {k} must not exceed catalog_size / cache_size = {groups}"),
                ));
            }
            let b = self.num_users / k;
            let side = self.side_length_m / (b as f64).sqrt();
            if self.min_distance_m >= side {
                return Err((
                    "min_distance_m",
                    format!("min_distance_m = {} must be below the cell side {side}", self.min_distance_m),
                ));
            }
            if let Some(c) = self.coop_min_clusters {
                if c < 2 || c > b {
                    return Err((
                        "coop_min_clusters",
                        format!("coop_min_clusters = {c} must lie in [2, B = {b}]"),
                    ));
                }
            }
        } else if let Some(c) = self.coop_min_clusters {
            if c < 2 {
                return Err(("coop_min_clusters", format!("coop_min_clusters = {c} must be >= 2")));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> d2d_coopnet::Result<PopularityModel> {
        PopularityModel::new(self.catalog_size, self.cache_size, self.zipf_beta)
    }

    pub fn path_loss(&self) -> PathLoss {
        match self.pathloss {
            PathLossKind::PowerLaw => PathLoss::power_law(self.alpha),
            PathLossKind::LogDistance => PathLoss::log_distance(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            hotspot_side_m: self.side_length_m,
            total_users: self.num_users,
            tx_power_w: dbm_to_watts(self.tx_power_dbm),
            noise_w: dbm_to_watts(self.noise_dbm),
            bandwidth_hz: self.bandwidth_hz,
            path_loss: self.path_loss(),
            min_distance_m: self.min_distance_m,
            neighbors: DEFAULT_NEIGHBORS,
        }
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            objective: self.objective,
            ..OptimizerOptions::default()
        }
    }

    pub fn sim_config(&self, eta: f64) -> SimConfig {
        SimConfig {
            eta,
            drops: self.drops,
            fading_draws: self.fading_draws,
            seed: self.seed,
            coop_mode: self.coop_sinr_mode,
            placement: self.placement,
            coop_min_clusters: self.coop_min_clusters,
            batches: MIN_BATCHES,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HOTSPOT: &str = include_str!("../../../configs/hotspot.conf");

    #[test]
    fn hotspot_file() {
        let c = SystemConfig::parse_str(HOTSPOT).unwrap();
        assert_eq!(c, SystemConfig::hotspot_defaults());
        assert_eq!(c.side_length_m, 100.0);
        assert_eq!(c.num_users, 180);
        assert_eq!(c.bandwidth_hz, 2e7);
        assert_eq!((c.tx_power_dbm, c.noise_dbm), (23.0, -100.0));
        assert_eq!((c.catalog_size, c.cache_size), (300, 10));
    }

    fn with(extra: &str) -> Result<SystemConfig, ConfigError> {
        SystemConfig::parse_str(&format!("{HOTSPOT}\n{extra}\n"))
    }

    fn err_line(e: ConfigError) -> usize {
        match e {
            ConfigError::Line { line, .. } => line,
            other => panic!("expected a line error, got {other}"),
        }
    }

    #[test]
    fn negative_beta_rejected() {
        let text = HOTSPOT.replace("zipf_beta = 1", "zipf_beta = -1");
        let e = SystemConfig::parse_str(&text).unwrap_err();
        assert!(e.to_string().contains("zipf_beta"));
        let line = HOTSPOT.lines().position(|l| l.starts_with("zipf_beta")).unwrap() + 1;
        assert_eq!(err_line(e), line);
    }

    #[test]
    fn divisibility_rejected() {
        let text = HOTSPOT.replace("num_users = 180", "num_users = 181");
        let e = SystemConfig::parse_str(&format!("{text}users_per_cluster = 30\n")).unwrap_err();
        assert!(e.to_string().contains("divide"), "{e}");
    }

    #[test]
    fn unknown_and_malformed_lines() {
        let e = with("colour = blue").unwrap_err();
        assert!(e.to_string().contains("unknown key"));
        assert_eq!(err_line(e), HOTSPOT.lines().count() + 2);
        let e = with("just words").unwrap_err();
        assert!(e.to_string().contains("expected `key = value`"));
        assert!(with("drops = many").is_err());
        assert!(with("drops = 5").is_err(), "duplicate key");
        assert!(with("pathloss = cubic").is_err());
        assert!(with("eta = 1.5").is_err());
        assert!(with("users_per_cluster = 60").is_err());
        assert!(with("users_per_cluster = 20\ncoop_min_clusters = 10").is_err());
    }

    #[test]
    fn missing_required_lists_defaults() {
        let e = SystemConfig::parse_str("side_length_m = 50\nnum_users = 20\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("catalog_size") && msg.contains("zipf_beta"), "{msg}");
        assert!(msg.contains("bandwidth_hz = 20000000"), "{msg}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# hotspot\nside_length_m = 100 # meters\n\nnum_users=180\ncatalog_size = 300\ncache_size = 10\nzipf_beta = 0.5\n";
        let c = SystemConfig::parse_str(text).unwrap();
        assert_eq!(c.zipf_beta, 0.5);
    }

    fn arb_config() -> impl Strategy<Value = SystemConfig> {
        (
            (1usize..=30, 1usize..=12, 0usize..=4),
            (0.0f64..2.0, 1e5f64..1e8, -10.0f64..40.0, 2.0f64..5.0),
            (prop::option::of(0.0f64..=1.0), 1usize..5000, any::<u64>(), prop::bool::ANY),
            (prop::bool::ANY, prop::bool::ANY, prop::bool::ANY),
        )
            .prop_map(|((k, b, extra_groups), (beta, w, p, alpha), (eta, drops, seed, coop_min), (pl, mode, obj))| {
                let groups = k + extra_groups;
                SystemConfig {
                    side_length_m: 100.0,
                    num_users: k * b,
                    users_per_cluster: Some(k),
                    bandwidth_hz: w,
                    tx_power_dbm: p,
                    noise_dbm: -100.0,
                    pathloss: if pl { PathLossKind::PowerLaw } else { PathLossKind::LogDistance },
                    alpha,
                    min_distance_m: 1.0,
                    catalog_size: groups * 10,
                    cache_size: 10,
                    zipf_beta: beta,
                    rate_floor_bps: 1e6,
                    eta,
                    drops,
                    fading_draws: 3,
                    seed,
                    coop_min_clusters: if coop_min && b >= 2 { Some(2) } else { None },
                    coop_sinr_mode: if mode { CoopSinrMode::ZfExact } else { CoopSinrMode::Approx },
                    placement: Placement::PerCell,
                    objective: if obj { Objective::Occupied } else { Objective::Nominal },
                }
            })
    }

    proptest! {
        #[test]
        fn round_trip(cfg in arb_config()) {
            let text = cfg.emit();
            let back = SystemConfig::parse_str(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
