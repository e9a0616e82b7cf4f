//! Monte Carlo spectral efficiencies of a fully loaded network, one link
//! per cluster on each band.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::geometry::ClusterLayout;
use crate::linkrates::RadioConfig;

use super::drop_rng;
use super::sinr::{composite_channel, coop_sinr_approx, draw_rayleigh, gain_matrix, ncoop_sinr, zf_sinr, ZF_ATTEMPTS};
use super::stats::MeanSe;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEfficiency {
    /// Mean N-Coop `log2(1 + SINR)` over clusters.
    pub ncoop: MeanSe,
    /// Mean Coop `log2(1 + SINR)` with the `1/B` orthogonality factor.
    pub coop_approx: MeanSe,
    /// Mean Coop `log2(1 + SINR)` under zero-forcing.
    pub coop_zf: MeanSe,
    pub zf_redraws: u64,
    /// Samples whose channel stayed ill-conditioned and were left out of `coop_zf`.
    pub zf_failures: u64,
}

struct Sample {
    ncoop: f64,
    approx: f64,
    zf: Option<f64>,
    redraws: u64,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Every cluster holds one DT and one DR, each uniform in its cell.
pub fn estimate_link_efficiency(
    layout: &ClusterLayout,
    radio: &RadioConfig,
    samples: usize,
    seed: u64,
) -> Result<LinkEfficiency> {
    if samples == 0 {
        return Err(domain("samples must be at least 1"));
    }
    let b = layout.cluster_count();
    let draws: Vec<Sample> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = drop_rng(seed, i as u64);
            let tx: Vec<(f64, f64)> = (0..b).map(|c| layout.sample_in_cell(c, &mut rng)).collect();
            let rx: Vec<(f64, f64)> = (0..b).map(|c| layout.sample_in_cell(c, &mut rng)).collect();
            let gains = gain_matrix(&tx, &rx, radio);
            let mut h = draw_rayleigh(b, &mut rng);
            let power: Vec<f64> = h.iter().map(|c| c.norm_sqr()).collect();
            let mean = |v: Vec<f64>| v.into_iter().map(log2_1p).sum::<f64>() / b as f64;
            let ncoop = mean(ncoop_sinr(&gains, &power, radio));
            let approx = mean(coop_sinr_approx(&gains, &power, radio));
            let mut zf = None;
            let mut redraws = 0;
            for attempt in 0..ZF_ATTEMPTS {
                if attempt > 0 {
                    h = draw_rayleigh(b, &mut rng);
                    redraws += 1;
                }
                if let Some(g) = zf_sinr(&composite_channel(&gains, &h), radio) {
                    zf = Some(log2_1p(g));
                    break;
                }
            }
            Sample {
                ncoop,
                approx,
                zf,
                redraws,
            }
        })
        .collect();
    Ok(LinkEfficiency {
        ncoop: MeanSe::from_samples(draws.iter().map(|s| s.ncoop)),
        coop_approx: MeanSe::from_samples(draws.iter().map(|s| s.approx)),
        coop_zf: MeanSe::from_samples(draws.iter().filter_map(|s| s.zf)),
        zf_redraws: draws.iter().map(|s| s.redraws).sum(),
        zf_failures: draws.iter().filter(|s| s.zf.is_none()).count() as u64,
    })
}
