//! Fixed deployment parameters shared by every cluster size.

use crate::error::{domain, Result};
use crate::geometry::ClusterLayout;
use crate::linkrates::{PathLoss, RadioConfig};

/// Default number of dominant interfering neighbour clusters.
pub const DEFAULT_NEIGHBORS: usize = 8;

/// Deployment that stays fixed while the cluster size `K` varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub hotspot_side_m: f64,
    pub total_users: usize,
    pub tx_power_w: f64,
    pub noise_w: f64,
    pub bandwidth_hz: f64,
    pub path_loss: PathLoss,
    pub min_distance_m: f64,
    pub neighbors: usize,
}

impl Scenario {
    /// Hotspot of side 100 m with 180 users, 23 dBm, -100 dBm noise, 20 MHz
    /// and the log-distance path loss.
    pub fn hotspot_defaults() -> Self {
        Self {
            hotspot_side_m: 100.0,
            total_users: 180,
            tx_power_w: dbm_to_watts(23.0),
            noise_w: dbm_to_watts(-100.0),
            bandwidth_hz: 20e6,
            path_loss: PathLoss::log_distance(),
            min_distance_m: 1.0,
            neighbors: DEFAULT_NEIGHBORS,
        }
    }

    pub fn with_path_loss(mut self, path_loss: PathLoss) -> Self {
        self.path_loss = path_loss;
        self
    }

    pub fn layout(&self, cluster_count: usize) -> Result<ClusterLayout> {
        ClusterLayout::build(self.hotspot_side_m, cluster_count)
    }

    /// Radio parameters when the hotspot is split into `cluster_count` cells.
    pub fn radio(&self, cluster_count: usize) -> Result<RadioConfig> {
        if cluster_count == 0 {
            return Err(domain("cluster count must be at least 1"));
        }
        let radio = RadioConfig {
            tx_power_w: self.tx_power_w,
            noise_w: self.noise_w,
            bandwidth_hz: self.bandwidth_hz,
            path_loss: self.path_loss,
            cell_side_m: self.hotspot_side_m / (cluster_count as f64).sqrt(),
            cluster_count,
            min_distance_m: self.min_distance_m,
            neighbors: self.neighbors,
        };
        radio.validate()?;
        Ok(radio)
    }
}

/// `10^((dBm - 30) / 10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
