//! Cluster grid and link-distance distributions.
//!
//! Distances are normalized by the analytic cell side `D = D_c / sqrt(B)`.
//! The signal link joins two uniform points in one unit square (support
//! `[0, sqrt 2]`); the interference link joins a uniform point in a unit
//! square to a uniform point in the horizontally adjacent square (support
//! `[0, sqrt 5]`).

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;

use crate::error::{domain, Result};
use crate::quadrature;

pub const SQRT_5: f64 = 2.236_067_977_499_79;

/// Absolute tolerance of the path-loss moment integrals.
pub const MOMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterLayout {
    pub hotspot_side: f64,
    pub grid_x: usize,
    pub grid_y: usize,
    pub cell_width: f64,
    pub cell_height: f64,
}

impl ClusterLayout {
    /// Splits a square hotspot of side `hotspot_side` into `clusters` cells.
    ///
    /// A perfect square count gives a square grid. Otherwise the grid has
    /// `grid_x` columns, the largest divisor of `clusters` not above its
    /// square root, and rectangular cells.
    pub fn build(hotspot_side: f64, clusters: usize) -> Result<Self> {
        if clusters == 0 {
            return Err(domain("cluster count must be at least 1"));
        }
        if !(hotspot_side.is_finite() && hotspot_side > 0.0) {
            return Err(domain(format!("hotspot side {hotspot_side} must be > 0")));
        }
        let grid_x = (1..=clusters)
            .take_while(|d| d * d <= clusters)
            .filter(|d| clusters.is_multiple_of(*d))
            .last()
            .unwrap_or(1);
        let grid_y = clusters / grid_x;
        Ok(Self {
            hotspot_side,
            grid_x,
            grid_y,
            cell_width: hotspot_side / grid_x as f64,
            cell_height: hotspot_side / grid_y as f64,
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.grid_x * self.grid_y
    }

    /// Side `D_c / sqrt(B)` used by the closed forms, whatever the grid shape.
    pub fn analytic_cell_side(&self) -> f64 {
        self.hotspot_side / (self.cluster_count() as f64).sqrt()
    }

    /// Column and row of cluster `index` (row-major).
    pub fn cell_coords(&self, index: usize) -> (usize, usize) {
        (index % self.grid_x, index / self.grid_x)
    }

    /// Lower-left corner of cluster `index`.
    pub fn cell_origin(&self, index: usize) -> (f64, f64) {
        let (cx, cy) = self.cell_coords(index);
        (cx as f64 * self.cell_width, cy as f64 * self.cell_height)
    }

    /// Cluster containing a point of the hotspot.
    pub fn cell_of(&self, x: f64, y: f64) -> usize {
        let cx = ((x / self.cell_width) as usize).min(self.grid_x - 1);
        let cy = ((y / self.cell_height) as usize).min(self.grid_y - 1);
        cy * self.grid_x + cx
    }

    pub fn contains(&self, index: usize, x: f64, y: f64) -> bool {
        let (ox, oy) = self.cell_origin(index);
        let eps = 1e-9 * self.hotspot_side;
        x >= ox - eps && x <= ox + self.cell_width + eps && y >= oy - eps && y <= oy + self.cell_height + eps
    }

    /// Uniform point inside cluster `index`.
    pub fn sample_in_cell<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> (f64, f64) {
        let (ox, oy) = self.cell_origin(index);
        (
            ox + rng.random::<f64>() * self.cell_width,
            oy + rng.random::<f64>() * self.cell_height,
        )
    }

    /// Colour of cluster `index` in a 2x2 frequency-reuse pattern.
    pub fn reuse_color(&self, index: usize) -> usize {
        let (cx, cy) = self.cell_coords(index);
        (cx % 2) + 2 * (cy % 2)
    }
}

/// Which link-distance distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkDistance {
    /// Two points in the same cell.
    Intra,
    /// Points in horizontally adjacent cells.
    Inter,
}

impl LinkDistance {
    pub fn support(self) -> f64 {
        match self {
            LinkDistance::Intra => SQRT_2,
            LinkDistance::Inter => SQRT_5,
        }
    }

    pub fn pdf(self, r: f64) -> f64 {
        match self {
            LinkDistance::Intra => intra_pdf(r),
            LinkDistance::Inter => inter_pdf(r),
        }
    }

    /// Branch points of the piecewise pdf.
    pub fn breakpoints(self) -> &'static [f64] {
        match self {
            LinkDistance::Intra => &[1.0],
            LinkDistance::Inter => &[1.0, SQRT_2, 2.0],
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            LinkDistance::Intra => sample_intra(rng),
            LinkDistance::Inter => sample_inter(rng),
        }
    }

    /// `integral of r^-alpha pdf(r)` over `[r_min, support]`.
    pub fn path_loss_moment(self, alpha: f64, r_min: f64) -> Result<f64> {
        let est = quadrature::integrate(
            |r| r.powf(-alpha) * self.pdf(r),
            r_min,
            self.support(),
            self.breakpoints(),
            MOMENT_TOL,
        )?;
        Ok(est.value)
    }
}

/// Density of the normalized distance between two uniform points of a unit
/// square.
pub fn intra_pdf(r: f64) -> f64 {
    if !(0.0..SQRT_2).contains(&r) {
        return 0.0;
    }
    if r < 1.0 {
        2.0 * r * (r * r - 4.0 * r + PI)
    } else {
        let eps = (r * r - 1.0).sqrt();
        let inv = 1.0 / r;
        8.0 * r * eps - 2.0 * r * (r * r + 2.0) + 4.0 * r * (inv.asin() - inv.acos())
    }
}

/// Density of the normalized distance between uniform points of two
/// horizontally adjacent unit squares.
///
/// Obtained as `f(r) = r * int p_x(r cos t) p_y(r sin t) dt` with the
/// triangular horizontal offset density on `[0, 2]` and `2(1 - v)` vertical
/// offset density on `[0, 1]`.
pub fn inter_pdf(r: f64) -> f64 {
    if !(0.0..SQRT_5).contains(&r) {
        return 0.0;
    }
    let r2 = r * r;
    if r < 1.0 {
        2.0 * r2 - r2 * r
    } else if r < SQRT_2 {
        let eps = (r2 - 1.0).sqrt();
        r * (2.0 * r2 - 4.0 * r - 4.0 * eps + 4.0 * (1.0 / r).acos() + 3.0)
    } else if r < 2.0 {
        let eps = (r2 - 1.0).sqrt();
        4.0 * r * eps + 4.0 * r * (1.0 / r).asin() - r - 4.0 * r2
    } else {
        let eps = (r2 - 1.0).sqrt();
        let xi = (r2 - 4.0).max(0.0).sqrt();
        r * (-r2 + 2.0 * xi + 4.0 * eps - 4.0 * (2.0 / r).min(1.0).acos() + 4.0 * (1.0 / r).asin() - 5.0)
    }
}

/// Distance between two independent uniform points of the unit square.
pub fn sample_intra<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let dx = rng.random::<f64>() - rng.random::<f64>();
    let dy = rng.random::<f64>() - rng.random::<f64>();
    dx.hypot(dy)
}

/// Distance between uniform points of `[0,1]^2` and `[1,2] x [0,1]`.
pub fn sample_inter<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let dx = 1.0 + rng.random::<f64>() - rng.random::<f64>();
    let dy = rng.random::<f64>() - rng.random::<f64>();
    dx.hypot(dy)
}

/// Path-loss moments `Q1`, `Q2` of a path-loss exponent and near-field cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossMoments {
    /// Signal moment plus `neighbors` interference moments.
    pub q1: f64,
    /// One adjacent-cell interference moment.
    pub q2: f64,
    /// The signal moment alone, `q1 - neighbors * q2`.
    pub signal: f64,
}

impl PathLossMoments {
    pub fn compute(alpha: f64, r_min: f64, neighbors: usize) -> Result<Self> {
        check_moment_args(alpha, r_min)?;
        let signal = LinkDistance::Intra.path_loss_moment(alpha, r_min)?;
        let q2 = LinkDistance::Inter.path_loss_moment(alpha, r_min)?;
        Ok(Self {
            q1: signal + neighbors as f64 * q2,
            q2,
            signal,
        })
    }
}

fn check_moment_args(alpha: f64, r_min: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(domain(format!("path-loss exponent {alpha} must be > 0")));
    }
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(domain(format!(
            "normalized minimum distance {r_min} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Whether an exponent lies below the usual `alpha >= 2` range (allowed,
/// but outside the regime the closed forms were built for).
pub fn exponent_is_unusual(alpha: f64) -> bool {
    alpha < 2.0
}

/// `Q1 = int r^-a g + 8 int r^-a f`, both from `r_min`.
pub fn q1(alpha: f64, r_min: f64) -> Result<f64> {
    Ok(PathLossMoments::compute(alpha, r_min, 8)?.q1)
}

/// `Q2 = int r^-a f` from `r_min`.
pub fn q2(alpha: f64, r_min: f64) -> Result<f64> {
    check_moment_args(alpha, r_min)?;
    LinkDistance::Inter.path_loss_moment(alpha, r_min)
}

/// Tabulated cdf of a link-distance distribution, for goodness-of-fit checks.
#[derive(Debug, Clone)]
pub struct CdfTable {
    step: f64,
    values: Vec<f64>,
}

impl CdfTable {
    pub fn new(dist: LinkDistance, cells: usize) -> Result<Self> {
        let support = dist.support();
        let step = support / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let lo = i as f64 * step;
            let hi = if i + 1 == cells { support } else { lo + step };
            acc += quadrature::integrate(|r| dist.pdf(r), lo, hi, dist.breakpoints(), 1e-13)?.value;
            values.push(acc);
        }
        Ok(Self { step, values })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let pos = r / self.step;
        let i = pos as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().expect("non-empty table");
        }
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Total mass (1 up to quadrature error).
    pub fn total(&self) -> f64 {
        *self.values.last().expect("non-empty table")
    }
}

/// Kolmogorov–Smirnov distance between samples and a tabulated cdf.
pub fn ks_distance(samples: &mut [f64], cdf: &CdfTable) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf.eval(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_examples() {
        let l = ClusterLayout::build(100.0, 4).unwrap();
        assert_eq!((l.grid_x, l.grid_y), (2, 2));
        assert!((l.analytic_cell_side() - 50.0).abs() < 1e-12);

        let l = ClusterLayout::build(100.0, 9).unwrap();
        assert_eq!((l.grid_x, l.grid_y), (3, 3));
        assert!((l.cell_width - 100.0 / 3.0).abs() < 1e-12);

        let l = ClusterLayout::build(100.0, 6).unwrap();
        assert_eq!((l.grid_x, l.grid_y), (2, 3));
        assert!((l.cell_width - 50.0).abs() < 1e-12);
        assert!((l.cell_height - 100.0 / 3.0).abs() < 1e-12);
        assert!((l.analytic_cell_side() - 100.0 / 6f64.sqrt()).abs() < 1e-12);

        let prime = ClusterLayout::build(100.0, 7).unwrap();
        assert_eq!((prime.grid_x, prime.grid_y), (1, 7));

        assert!(ClusterLayout::build(100.0, 0).is_err());
        assert!(ClusterLayout::build(0.0, 4).is_err());
    }

    #[test]
    fn layout_cells_tile_the_hotspot() {
        let l = ClusterLayout::build(100.0, 12).unwrap();
        assert!((l.cell_width * l.grid_x as f64 - 100.0).abs() < 1e-12);
        assert!((l.cell_height * l.grid_y as f64 - 100.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..12 {
            for _ in 0..50 {
                let (x, y) = l.sample_in_cell(i, &mut rng);
                assert!(l.contains(i, x, y));
                assert_eq!(l.cell_of(x, y), i);
            }
        }
    }

    #[test]
    fn reuse_colors_of_2x2() {
        let l = ClusterLayout::build(100.0, 4).unwrap();
        let colors: Vec<usize> = (0..4).map(|i| l.reuse_color(i)).collect();
        assert_eq!(colors, vec![0, 1, 2, 3]);
    }

    #[test]
    fn pdf_point_values() {
        assert_eq!(intra_pdf(0.0), 0.0);
        assert_eq!(inter_pdf(0.0), 0.0);
        assert!((intra_pdf(0.5) - 2.0 * 0.5 * (0.25 - 2.0 + PI)).abs() < 1e-15);
        assert!((inter_pdf(0.5) - 0.375).abs() < 1e-15);
        assert_eq!(intra_pdf(1.5), 0.0);
        assert_eq!(inter_pdf(2.3), 0.0);
        assert_eq!(intra_pdf(-0.1), 0.0);
    }

    /// Independent evaluation of the inter-cell density by integrating the
    /// product of the offset densities along the arc of radius `r`.
    fn inter_pdf_by_arc(r: f64) -> f64 {
        let px = |u: f64| if (0.0..=2.0).contains(&u) { 1.0 - (1.0 - u).abs() } else { 0.0 };
        let py = |v: f64| if (0.0..=1.0).contains(&v) { 2.0 * (1.0 - v) } else { 0.0 };
        let n = 200_000;
        let h = 0.5 * PI / n as f64;
        (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                px(r * t.cos()) * py(r * t.sin())
            })
            .sum::<f64>()
            * h
            * r
    }

    #[test]
    fn inter_pdf_matches_arc_integral_on_every_branch() {
        for r in [0.2, 0.7, 1.05, 1.2, 1.4, 1.45, 1.7, 1.95, 2.02, 2.1, 2.2] {
            let a = inter_pdf(r);
            let b = inter_pdf_by_arc(r);
            assert!((a - b).abs() < 1e-6, "r={r}: closed {a} vs arc {b}");
        }
    }

    #[test]
    fn pdfs_continuous_at_branch_points() {
        for &(d, bp) in &[
            (LinkDistance::Intra, 1.0),
            (LinkDistance::Inter, 1.0),
            (LinkDistance::Inter, SQRT_2),
            (LinkDistance::Inter, 2.0),
        ] {
            let lo = d.pdf(bp - 1e-9);
            let hi = d.pdf(bp + 1e-9);
            assert!((lo - hi).abs() < 1e-3, "{d:?} at {bp}: {lo} vs {hi}");
        }
    }

    #[test]
    fn pdfs_normalized_and_nonnegative() {
        for d in [LinkDistance::Intra, LinkDistance::Inter] {
            let total = quadrature::integrate(|r| d.pdf(r), 0.0, d.support(), d.breakpoints(), 1e-12)
                .unwrap()
                .value;
            assert!((total - 1.0).abs() < 1e-6, "{d:?}: {total}");
            for i in 0..=2000 {
                let r = d.support() * i as f64 / 2000.0;
                assert!(d.pdf(r) >= -1e-12, "{d:?} negative at {r}");
            }
        }
    }

    #[test]
    fn samplers_respect_support_and_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let x = sample_intra(&mut a);
            let y = sample_inter(&mut a);
            assert!((0.0..=SQRT_2).contains(&x));
            assert!((0.0..=SQRT_5).contains(&y));
            assert_eq!(x, sample_intra(&mut b));
            assert_eq!(y, sample_inter(&mut b));
        }
    }

    #[test]
    fn moments_ordering_and_monotonicity() {
        for alpha in [2.0, 2.5, 3.0, 4.0] {
            let mut last = (f64::INFINITY, f64::INFINITY);
            for r_min in [0.01, 0.02, 0.05, 0.1, 0.3] {
                let m = PathLossMoments::compute(alpha, r_min, 8).unwrap();
                assert!(m.q1 >= 8.0 * m.q2);
                assert!(m.q1 < last.0 && m.q2 < last.1);
                last = (m.q1, m.q2);
            }
        }
    }

    #[test]
    fn moment_argument_errors() {
        assert!(q1(3.0, 0.0).is_err());
        assert!(q2(3.0, 1.0).is_err());
        assert!(q1(1.5, 0.05).is_ok());
        assert!(exponent_is_unusual(1.5));
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn moments_match_fixed_grid_simpson() {
        let (alpha, r_min) = (3.0, 0.02);
        let g = simpson(|r| r.powf(-alpha) * intra_pdf(r), r_min, SQRT_2, 1_000_000);
        let f = simpson(|r| r.powf(-alpha) * inter_pdf(r), r_min, SQRT_5, 1_000_000);
        let q1v = q1(alpha, r_min).unwrap();
        let q2v = q2(alpha, r_min).unwrap();
        assert!(((g + 8.0 * f) - q1v).abs() / q1v < 1e-6);
        assert!((f - q2v).abs() / q2v < 1e-6);
    }

    #[test]
    fn cdf_table_total_is_one() {
        for d in [LinkDistance::Intra, LinkDistance::Inter] {
            let t = CdfTable::new(d, 2000).unwrap();
            assert!((t.total() - 1.0).abs() < 1e-9);
            assert_eq!(t.eval(-1.0), 0.0);
            assert!((t.eval(10.0) - 1.0).abs() < 1e-9);
        }
    }
}
