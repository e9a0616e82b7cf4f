//! Sample means, standard errors and batch-means confidence intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Minimum number of batches for a confidence interval.
pub const MIN_BATCHES: usize = 30;

/// Mean with its standard error from i.i.d. samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanSe {
    /// Sequential Welford pass; the order of `values` is the reduction order.
    pub fn from_samples<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for v in values {
            n += 1;
            let d = v - mean;
            mean += d / n as f64;
            m2 += d * (v - mean);
        }
        let std_error = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            mean: if n > 0 { mean } else { f64::NAN },
            std_error,
            samples: n,
        }
    }

    /// `|mean - target|` in standard errors. A zero standard error counts
    /// exact agreement as 0 and anything else as infinitely far.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Mean with a 95% batch-means confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_half_width: f64,
    pub batches: usize,
}

/// Splits `values` into `batches` contiguous batches of near-equal size
/// (the first `len % batches` get one extra) and applies a Student-t
/// interval to the batch means.
pub fn batch_means(values: &[f64], batches: usize) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate {
            mean: f64::NAN,
            std_error: f64::NAN,
            ci_half_width: f64::NAN,
            batches: 0,
        };
    }
    let nb = batches.clamp(1, n);
    let base = n / nb;
    let extra = n % nb;
    let mut means = Vec::with_capacity(nb);
    let mut start = 0;
    for b in 0..nb {
        let len = base + usize::from(b < extra);
        let slice = &values[start..start + len];
        means.push(slice.iter().sum::<f64>() / len as f64);
        start += len;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if nb < 2 {
        return Estimate {
            mean,
            std_error: f64::INFINITY,
            ci_half_width: f64::INFINITY,
            batches: nb,
        };
    }
    let bm = means.iter().sum::<f64>() / nb as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (nb - 1) as f64;
    let std_error = (var / nb as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (nb - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    Estimate {
        mean,
        std_error,
        ci_half_width: t * std_error,
        batches: nb,
    }
}
