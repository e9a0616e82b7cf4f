//! Closed-form average spectral efficiencies of N-Coop and Coop links,
//! network throughput, per-user rates and the Coop-dominance condition.

use crate::error::{domain, Result};
use crate::geometry::PathLossMoments;

/// Distance-dependent channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLoss {
    /// Gain `d^-alpha` with `d` in meters.
    PowerLaw { alpha: f64 },
    /// Loss `intercept + slope * log10(d)` dB with `d` in meters.
    LogDistance { intercept_db: f64, slope_db: f64 },
}

impl PathLoss {
    pub fn power_law(alpha: f64) -> Self {
        PathLoss::PowerLaw { alpha }
    }

    /// `37.6 + 36.8 log10(d)` dB.
    pub fn log_distance() -> Self {
        PathLoss::LogDistance {
            intercept_db: 37.6,
            slope_db: 36.8,
        }
    }

    /// Equivalent power-law exponent.
    pub fn exponent(&self) -> f64 {
        match *self {
            PathLoss::PowerLaw { alpha } => alpha,
            PathLoss::LogDistance { slope_db, .. } => slope_db / 10.0,
        }
    }

    /// Gain at 1 m.
    pub fn coefficient(&self) -> f64 {
        match *self {
            PathLoss::PowerLaw { .. } => 1.0,
            PathLoss::LogDistance { intercept_db, .. } => 10f64.powf(-intercept_db / 10.0),
        }
    }

    /// Linear gain at `distance_m`, clamped below at `min_distance_m`.
    pub fn gain(&self, distance_m: f64, min_distance_m: f64) -> f64 {
        self.coefficient() * distance_m.max(min_distance_m).powf(-self.exponent())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub tx_power_w: f64,
    pub noise_w: f64,
    pub bandwidth_hz: f64,
    pub path_loss: PathLoss,
    pub cell_side_m: f64,
    pub cluster_count: usize,
    pub min_distance_m: f64,
    /// Interfering neighbour cells kept by the analytic truncation.
    pub neighbors: usize,
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("transmit power", self.tx_power_w),
            ("noise power", self.noise_w),
            ("bandwidth", self.bandwidth_hz),
            ("cell side", self.cell_side_m),
            ("minimum distance", self.min_distance_m),
            ("path-loss exponent", self.path_loss.exponent()),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.cluster_count == 0 || self.neighbors == 0 {
            return Err(domain("cluster and neighbour counts must be at least 1"));
        }
        if self.min_distance_m >= self.cell_side_m {
            return Err(domain(format!(
                "minimum distance {} m must be below the cell side {} m",
                self.min_distance_m, self.cell_side_m
            )));
        }
        Ok(())
    }

    /// Near-field cutoff in units of the cell side.
    pub fn normalized_min_distance(&self) -> f64 {
        self.min_distance_m / self.cell_side_m
    }

    pub fn moments(&self) -> Result<PathLossMoments> {
        self.validate()?;
        PathLossMoments::compute(
            self.path_loss.exponent(),
            self.normalized_min_distance(),
            self.neighbors,
        )
    }

    /// `P * c * D^-alpha`: received power at one cell side.
    fn power_at_cell_side(&self) -> f64 {
        self.tx_power_w
            * self.path_loss.coefficient()
            * self.cell_side_m.powf(-self.path_loss.exponent())
    }
}

/// Closed-form link quantities of one radio configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRates {
    pub moments: PathLossMoments,
    /// bits/s/Hz
    pub ncoop_se: f64,
    /// bits/s/Hz
    pub coop_se: f64,
    /// Mean interference power at an N-Coop receiver (W).
    pub mean_interference_w: f64,
    /// Whether the mean interference dominates `B * sigma^2`.
    pub coop_dominates: bool,
}

impl LinkRates {
    pub fn evaluate(radio: &RadioConfig) -> Result<Self> {
        let moments = radio.moments()?;
        let ncoop_se = moments.q1.log2() - moments.q2.log2() - (radio.neighbors as f64).log2();
        let noise_total = radio.cluster_count as f64 * radio.noise_w;
        let coop_se = (radio.power_at_cell_side() * moments.q1 / noise_total).ln_1p()
            / std::f64::consts::LN_2;
        let mean_interference_w = radio.neighbors as f64 * radio.power_at_cell_side() * moments.q2;
        Ok(Self {
            moments,
            ncoop_se,
            coop_se,
            mean_interference_w,
            coop_dominates: mean_interference_w >= noise_total,
        })
    }
}

/// Average N-Coop spectral efficiency `log2 Q1 - log2 Q2 - log2(neighbors)`.
pub fn ncoop_spectral_efficiency(radio: &RadioConfig) -> Result<f64> {
    Ok(LinkRates::evaluate(radio)?.ncoop_se)
}

/// Average Coop spectral efficiency `log2(1 + P D^-a Q1 / (B sigma^2))`.
pub fn coop_spectral_efficiency(radio: &RadioConfig) -> Result<f64> {
    Ok(LinkRates::evaluate(radio)?.coop_se)
}

/// `I >= B sigma^2`; when it holds the Coop link is at least as fast as the
/// N-Coop link.
pub fn prop4_condition(radio: &RadioConfig) -> Result<bool> {
    Ok(LinkRates::evaluate(radio)?.coop_dominates)
}

/// Average network throughput in bits/s:
/// `W B (P^c eta R_c + (1 - P^c eta) R_n)`.
pub fn network_throughput(
    radio: &RadioConfig,
    eta: f64,
    coop_prob: f64,
    coop_se: f64,
    ncoop_se: f64,
) -> f64 {
    let wb = radio.bandwidth_hz * radio.cluster_count as f64;
    wb * (coop_prob * eta * coop_se + (1.0 - coop_prob * eta) * ncoop_se)
}

/// Average rate of one user class, or the absence of users in that class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserRate {
    Rate(f64),
    /// The class has no users on average; any rate floor holds vacuously.
    NoUsers,
}

impl UserRate {
    pub fn meets(&self, floor: f64) -> bool {
        match *self {
            UserRate::Rate(r) => r >= floor,
            UserRate::NoUsers => true,
        }
    }

    /// `NoUsers` maps to infinity.
    pub fn value(&self) -> f64 {
        match *self {
            UserRate::Rate(r) => r,
            UserRate::NoUsers => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRates {
    pub coop: UserRate,
    pub ncoop: UserRate,
}

/// Round-robin user rates: `W B eta R_c / N_c` and `W B (1 - eta) R_n / N_n`.
pub fn user_rates(
    radio: &RadioConfig,
    eta: f64,
    avg_coop_users: f64,
    avg_ncoop_users: f64,
    coop_se: f64,
    ncoop_se: f64,
) -> UserRates {
    let wb = radio.bandwidth_hz * radio.cluster_count as f64;
    let rate = |share: f64, se: f64, users: f64| {
        if users > 0.0 {
            UserRate::Rate(wb * share * se / users)
        } else {
            UserRate::NoUsers
        }
    };
    UserRates {
        coop: rate(eta, coop_se, avg_coop_users),
        ncoop: rate(1.0 - eta, ncoop_se, avg_ncoop_users),
    }
}

/// All closed-form rates of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub ncoop_se: f64,
    pub coop_se: f64,
    pub throughput: f64,
    pub coop_user_rate: UserRate,
    pub ncoop_user_rate: UserRate,
    pub prop4_holds: bool,
}

impl RateReport {
    pub fn new(
        radio: &RadioConfig,
        eta: f64,
        coop_prob: f64,
        avg_coop_users: f64,
        avg_ncoop_users: f64,
    ) -> Result<Self> {
        let rates = LinkRates::evaluate(radio)?;
        let users = user_rates(
            radio,
            eta,
            avg_coop_users,
            avg_ncoop_users,
            rates.coop_se,
            rates.ncoop_se,
        );
        Ok(Self {
            ncoop_se: rates.ncoop_se,
            coop_se: rates.coop_se,
            throughput: network_throughput(radio, eta, coop_prob, rates.coop_se, rates.ncoop_se),
            coop_user_rate: users.coop,
            ncoop_user_rate: users.ncoop,
            prop4_holds: rates.coop_dominates,
        })
    }
}
