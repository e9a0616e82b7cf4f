//! Rayleigh-faded SINR of N-Coop links and of zero-forcing Coop links.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linkrates::RadioConfig;

/// Condition number above which a Coop channel draw is redrawn.
pub const MAX_CONDITION: f64 = 1e8;
/// Draws tried per slot before the slot is dropped.
pub const ZF_ATTEMPTS: u32 = 10;

/// How the Coop SINR is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoopSinrMode {
    /// Zero-forcing over the drawn channel.
    #[default]
    ZfExact,
    /// Matched-filter power scaled by the number of cooperating clusters.
    Approx,
}

/// Path-loss gains `G[i][j]` from transmitter `j` to receiver `i`
/// (row-major, `n x n`), distances clamped below at `d_min`.
pub fn gain_matrix(tx: &[(f64, f64)], rx: &[(f64, f64)], radio: &RadioConfig) -> Vec<f64> {
    let n = tx.len();
    debug_assert_eq!(n, rx.len());
    let mut g = Vec::with_capacity(n * n);
    for &(xi, yi) in rx {
        for &(xj, yj) in tx {
            let d = (xi - xj).hypot(yi - yj);
            g.push(radio.path_loss.gain(d, radio.min_distance_m));
        }
    }
    g
}

/// Unit-mean exponential fading powers, one per entry of an `n x n` matrix.
pub fn draw_fading<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n * n).map(|_| rng.sample::<f64, _>(Exp1)).collect()
}

/// `CN(0, 1)` coefficients for an `n x n` matrix.
pub fn draw_rayleigh<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n * n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

/// SINR of each N-Coop link, every other active DT interfering.
pub fn ncoop_sinr(gains: &[f64], fading: &[f64], radio: &RadioConfig) -> Vec<f64> {
    let n = (gains.len() as f64).sqrt() as usize;
    let p = radio.tx_power_w;
    (0..n)
        .map(|i| {
            let row = &gains[i * n..(i + 1) * n];
            let fad = &fading[i * n..(i + 1) * n];
            let signal = p * row[i] * fad[i];
            let interference: f64 = (0..n).filter(|&j| j != i).map(|j| p * row[j] * fad[j]).sum();
            signal / (interference + radio.noise_w)
        })
        .collect()
}

/// `P sum_j G_ij |h_ij|^2 / (n sigma^2)` for each receiver.
pub fn coop_sinr_approx(gains: &[f64], fading: &[f64], radio: &RadioConfig) -> Vec<f64> {
    let n = (gains.len() as f64).sqrt() as usize;
    (0..n)
        .map(|i| {
            let s: f64 = (0..n).map(|j| gains[i * n + j] * fading[i * n + j]).sum();
            radio.tx_power_w * s / (n as f64 * radio.noise_w)
        })
        .collect()
}

/// Composite channel `H_ij = sqrt(G_ij) h_ij`.
pub fn composite_channel(gains: &[f64], h: &[Complex64]) -> DMatrix<Complex64> {
    let n = (gains.len() as f64).sqrt() as usize;
    DMatrix::from_fn(n, n, |i, j| h[i * n + j] * gains[i * n + j].sqrt())
}

/// Common post-ZF SINR with total power `n P` split equally over the
/// streams: `n P / (||H^-1||_F^2 sigma^2)`. `None` for an ill-conditioned
/// channel.
pub fn zf_sinr(channel: &DMatrix<Complex64>, radio: &RadioConfig) -> Option<f64> {
    let n = channel.nrows();
    let sv = channel.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min.is_nan() || min <= 0.0 || max / min > MAX_CONDITION {
        return None;
    }
    // ||H^-1||_F^2 = sum of 1 / s_k^2.
    let inv_norm2: f64 = sv.iter().map(|s| 1.0 / (s * s)).sum();
    Some(n as f64 * radio.tx_power_w / (inv_norm2 * radio.noise_w))
}

/// Outcome of one Coop-band fading draw.
#[derive(Debug, Clone, PartialEq)]
pub struct CoopDraw {
    /// Per-receiver SINR, `None` when every attempt was ill-conditioned.
    pub sinr: Option<Vec<f64>>,
    /// Draws rejected for conditioning.
    pub redraws: u32,
}

/// SINR of the cooperating links for one slot.
pub fn coop_sinr<R: Rng + ?Sized>(
    gains: &[f64],
    mode: CoopSinrMode,
    radio: &RadioConfig,
    rng: &mut R,
) -> CoopDraw {
    let n = (gains.len() as f64).sqrt() as usize;
    match mode {
        CoopSinrMode::Approx => {
            let fading = draw_fading(n, rng);
            CoopDraw {
                sinr: Some(coop_sinr_approx(gains, &fading, radio)),
                redraws: 0,
            }
        }
        CoopSinrMode::ZfExact => {
            for attempt in 0..ZF_ATTEMPTS {
                let h = draw_rayleigh(n, rng);
                if let Some(g) = zf_sinr(&composite_channel(gains, &h), radio) {
                    return CoopDraw {
                        sinr: Some(vec![g; n]),
                        redraws: attempt,
                    };
                }
            }
            CoopDraw {
                sinr: None,
                redraws: ZF_ATTEMPTS,
            }
        }
    }
}

/// `log2(1 + sinr)` summed over links.
pub fn sum_spectral_efficiency(sinr: &[f64]) -> f64 {
    sinr.iter().map(|g| g.ln_1p() / std::f64::consts::LN_2).sum()
}
