//! The power-law restricted mobility model.
//!
//! Each node owns a fixed home-point; at every slot its position is redrawn
//! independently with spatial density `φ(d) = s(d)/G` around the home-point,
//! where `s(d) = min(1, d^{-δ})`, `d` is the torus distance from the
//! home-point, and `G = ∬ s(d)` normalizes φ over the whole torus.
//!
//! Sampling uses the exact radial law on the square torus: the mass at
//! distance ρ is `s(ρ)·ρ·ω(ρ)` where `ω(ρ)` is the angular measure of the
//! torus circle of radius ρ (a full `2π` for `ρ ≤ side/2`, clipped by the
//! fundamental square beyond). A tabulated inverse of the radial CDF plus a
//! uniform draw on the valid arcs gives exact positions for every δ without
//! rejection.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // provides f64 math in no_std builds
use num_traits::Float as _;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, TorusGeometry, TorusPoint};
use crate::quad;

/// Errors from shape construction and home-point generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityError {
    /// The decay exponent must be finite and non-negative.
    InvalidDelta(f64),
    /// Quadrature failed to converge on the reported interval.
    QuadratureNonConvergence { lo: f64, hi: f64 },
    /// The cumulative table disagrees with the independent normalization
    /// quadrature beyond the 1e-6 relative tolerance.
    NormalizationMismatch { table: f64, reference: f64 },
    /// Inverse-CDF tables need at least 1024 knots.
    ResolutionTooSmall(u32),
    /// Home-point sets need at least two nodes.
    TooFewNodes(u32),
    Geometry(GeometryError),
}

impl fmt::Display for MobilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MobilityError::InvalidDelta(d) => write!(f, "delta must be finite and >= 0, got {d}"),
            MobilityError::QuadratureNonConvergence { lo, hi } => {
                write!(f, "radial quadrature did not converge on [{lo}, {hi}]")
            }
            MobilityError::NormalizationMismatch { table, reference } => write!(
                f,
                "cumulative radial mass {table} disagrees with normalization constant {reference}"
            ),
            MobilityError::ResolutionTooSmall(r) => {
                write!(f, "shape resolution must be >= 1024, got {r}")
            }
            MobilityError::TooFewNodes(n) => write!(f, "need at least 2 nodes, got {n}"),
            MobilityError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl From<GeometryError> for MobilityError {
    fn from(e: GeometryError) -> Self {
        MobilityError::Geometry(e)
    }
}

/// Unnormalized spatial density `s(d) = min(1, d^{-δ})`.
///
/// The clamp at 1 removes the divergence at the home-point; `s ≡ 1` for
/// `d <= 1` and for δ = 0 (the uniform case).
#[inline]
pub fn unnormalized_density(d: f64, delta: f64) -> f64 {
    debug_assert!(d >= 0.0);
    // 0^0 = 1 covers (d = 0, δ = 0); d^{-δ} = +inf at d = 0 clamps to 1.
    d.powf(-delta).min(1.0)
}

/// Angular measure (radians) of the set of directions θ for which the point
/// at Euclidean offset `ρ·(cos θ, sin θ)` from a center lies in the center's
/// fundamental square, i.e. has torus distance exactly ρ.
///
/// `2π` for `ρ <= side/2`; beyond that each of the four square edges clips
/// an arc of `2·acos((side/2)/ρ)`; zero past the half-diagonal.
fn circle_arc_measure(rho: f64, side: f64) -> f64 {
    let half = 0.5 * side;
    if rho <= half {
        core::f64::consts::TAU
    } else {
        let ratio = (half / rho).clamp(-1.0, 1.0);
        (core::f64::consts::TAU - 8.0 * ratio.acos()).max(0.0)
    }
}

/// Radial mass density on the square torus: `s(ρ)·ρ·ω(ρ)`.
fn radial_mass(rho: f64, delta: f64, side: f64) -> f64 {
    unnormalized_density(rho, delta) * rho * circle_arc_measure(rho, side)
}

/// Integration breakpoints: the kink of `min(1, ρ^{-δ})` at ρ = 1 and the
/// arc-clipping kink at ρ = side/2.
fn radial_segments(side: f64) -> Vec<f64> {
    let d_max = side * core::f64::consts::FRAC_1_SQRT_2;
    let mut pts = Vec::with_capacity(4);
    pts.push(0.0);
    if 1.0 < d_max {
        pts.push(1.0);
    }
    let half = 0.5 * side;
    if half > 0.0 && half < d_max && (half - 1.0).abs() > 1e-12 {
        pts.push(half);
    }
    pts.push(d_max);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

/// Normalization constant `G = ∬ s(d(origin, ·))` over the full torus
/// square, evaluated as the exact radial integral `∫ s(ρ)·ρ·ω(ρ) dρ` with
/// the singular ring ρ = 1 and the clipping radius side/2 split explicitly.
/// Relative error well below 1e-6.
pub fn normalization_constant(delta: f64, g: &TorusGeometry) -> Result<f64, MobilityError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(MobilityError::InvalidDelta(delta));
    }
    let side = g.side();
    let half = 0.5 * side;
    let segs = radial_segments(side);
    let f = |rho: f64| radial_mass(rho, delta, side);
    let mut total = 0.0;
    for w in segs.windows(2) {
        let piece = if w[0] >= half {
            // The arc measure has a sqrt kink at side/2; substitute
            // u = acos(half/rho) to integrate a smooth function instead.
            let fu = |u: f64| {
                let cos_u = u.cos();
                let rho = half / cos_u;
                unnormalized_density(rho, delta)
                    * rho
                    * (core::f64::consts::TAU - 8.0 * u)
                    * (half * u.sin() / (cos_u * cos_u))
            };
            let u_start = (half / w[0]).clamp(-1.0, 1.0).acos();
            let u_end = (half / w[1]).clamp(-1.0, 1.0).acos();
            quad::adaptive_simpson(&fu, u_start, u_end, 1e-10, 1e-14)
        } else {
            quad::adaptive_simpson(&f, w[0], w[1], 1e-10, 1e-14)
        };
        total += piece
            .map_err(|e| MobilityError::QuadratureNonConvergence { lo: e.a, hi: e.b })?;
    }
    Ok(total)
}

/// The mobility shape: exponent, torus, normalization constant and the
/// tabulated inverse radial CDF (quantile → torus distance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobilityShape {
    delta: f64,
    geometry: TorusGeometry,
    normalization: f64,
    /// `inverse_cdf[j]` is the distance at quantile `j / (len - 1)`.
    inverse_cdf: Vec<f64>,
}

impl MobilityShape {
    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    /// The normalization constant G (area units).
    #[inline]
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    #[inline]
    pub fn resolution(&self) -> u32 {
        self.inverse_cdf.len() as u32
    }

    /// Distance at a given quantile (linear interpolation between knots).
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let last = self.inverse_cdf.len() - 1;
        let pos = u * last as f64;
        let j = (pos as usize).min(last - 1);
        let frac = pos - j as f64;
        self.inverse_cdf[j] + frac * (self.inverse_cdf[j + 1] - self.inverse_cdf[j])
    }

    /// Radial CDF `P(d <= rho)` recovered from the tabulated inverse.
    pub fn radial_cdf(&self, rho: f64) -> f64 {
        let table = &self.inverse_cdf;
        let last = table.len() - 1;
        if rho <= table[0] {
            return 0.0;
        }
        if rho >= table[last] {
            return 1.0;
        }
        let j = table.partition_point(|&d| d <= rho) - 1;
        let (lo, hi) = (table[j], table[j + 1]);
        let frac = if hi > lo { (rho - lo) / (hi - lo) } else { 1.0 };
        (j as f64 + frac) / last as f64
    }

    /// Table rows `(quantile, distance)` for export.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let last = (self.inverse_cdf.len() - 1) as f64;
        self.inverse_cdf
            .iter()
            .enumerate()
            .map(move |(j, &d)| (j as f64 / last, d))
    }
}

/// Build the mobility shape for the given exponent and torus.
///
/// The radial CDF is accumulated by composite quadrature on each smooth
/// segment and inverted at `resolution` uniform quantiles; the cumulative
/// total is cross-checked against [`normalization_constant`] to 1e-6.
pub fn build_shape(
    delta: f64,
    g: &TorusGeometry,
    resolution: u32,
) -> Result<MobilityShape, MobilityError> {
    if resolution < 1024 {
        return Err(MobilityError::ResolutionTooSmall(resolution));
    }
    let reference = normalization_constant(delta, g)?;
    let side = g.side();
    let segs = radial_segments(side);
    let f = |rho: f64| radial_mass(rho, delta, side);

    // Dense cumulative mass table over all segments.
    let panels_per_segment = (resolution as usize * 4).max(16_384);
    let mut xs: Vec<f64> = Vec::new();
    let mut cum: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    for w in segs.windows(2) {
        let (sx, scum) = quad::cumulative_simpson(&f, w[0], w[1], panels_per_segment);
        let start = if xs.is_empty() { 0 } else { 1 };
        for i in start..sx.len() {
            xs.push(sx[i]);
            cum.push(offset + scum[i]);
        }
        if xs.len() == sx.len() && start == 0 {
            // first segment included its left endpoint
        }
        offset += *scum.last().unwrap();
    }
    if xs[0] != segs[0] {
        xs.insert(0, segs[0]);
        cum.insert(0, 0.0);
    }
    let total = *cum.last().unwrap();
    if !(total.is_finite() && total > 0.0)
        || (total - reference).abs() > 1e-6 * reference.abs()
    {
        return Err(MobilityError::NormalizationMismatch {
            table: total,
            reference,
        });
    }

    // Invert at uniform quantiles with a single merge pass.
    let k = resolution as usize;
    let mut inverse_cdf = Vec::with_capacity(k);
    let mut i = 0usize;
    for j in 0..k {
        let target = total * j as f64 / (k - 1) as f64;
        while i + 1 < cum.len() - 1 && cum[i + 1] < target {
            i += 1;
        }
        let (c_lo, c_hi) = (cum[i], cum[i + 1]);
        let x = if c_hi > c_lo {
            let frac = ((target - c_lo) / (c_hi - c_lo)).clamp(0.0, 1.0);
            xs[i] + frac * (xs[i + 1] - xs[i])
        } else {
            xs[i + 1]
        };
        inverse_cdf.push(x);
    }
    inverse_cdf[0] = 0.0;
    let last = inverse_cdf.len() - 1;
    inverse_cdf[last] = side * core::f64::consts::FRAC_1_SQRT_2;

    Ok(MobilityShape {
        delta,
        geometry: *g,
        normalization: reference,
        inverse_cdf,
    })
}

/// Draw a position with density φ around `home`: a radial draw through the
/// tabulated inverse CDF, then a uniform direction over the arcs where the
/// torus circle of that radius stays inside the fundamental square.
pub fn sample_position<R: Rng + ?Sized>(
    home: TorusPoint,
    shape: &MobilityShape,
    rng: &mut R,
) -> TorusPoint {
    let side = shape.geometry.side();
    let rho = shape.quantile(rng.gen::<f64>());
    let half = 0.5 * side;
    let (dx, dy) = if rho <= half {
        // Uniform direction via Marsaglia rejection (no trig).
        loop {
            let u = 2.0 * rng.gen::<f64>() - 1.0;
            let v = 2.0 * rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s <= 1.0 {
                let inv = rho / s.sqrt();
                break (u * inv, v * inv);
            }
        }
    } else {
        // Circle clipped by the square: valid directions form four arcs
        // centered on the diagonals; pick a quadrant, then a point on its arc.
        let alpha = (half / rho).clamp(-1.0, 1.0).acos();
        let span = core::f64::consts::FRAC_PI_2 - 2.0 * alpha;
        let w = alpha + rng.gen::<f64>() * span.max(0.0);
        let quadrant = rng.gen_range(0u32..4);
        let theta = quadrant as f64 * core::f64::consts::FRAC_PI_2 + w;
        (rho * theta.cos(), rho * theta.sin())
    };
    shape
        .geometry
        .wrap(home.x() + dx, home.y() + dy)
        .expect("finite offset")
}

/// The fixed home-points of all nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomePoints {
    points: Vec<TorusPoint>,
}

impl HomePoints {
    /// Wrap an explicit list of (already canonical) home-points.
    pub fn from_points(points: Vec<TorusPoint>) -> Self {
        HomePoints { points }
    }

    /// `n` i.i.d. uniform home-points on the torus.
    pub fn generate<R: Rng + ?Sized>(
        n: u32,
        g: &TorusGeometry,
        rng: &mut R,
    ) -> Result<Self, MobilityError> {
        if n < 2 {
            return Err(MobilityError::TooFewNodes(n));
        }
        let side = g.side();
        let points = (0..n)
            .map(|_| {
                g.wrap(rng.gen::<f64>() * side, rng.gen::<f64>() * side)
                    .expect("finite")
            })
            .collect();
        Ok(HomePoints { points })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn get(&self, id: crate::NodeId) -> TorusPoint {
        self.points[id as usize]
    }

    #[inline]
    pub fn as_slice(&self) -> &[TorusPoint] {
        &self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::slope_fit;
    use crate::rng::{stream_rng, StreamDomain};
    use crate::stats;
    use alloc::vec;

    #[test]
    fn density_examples() {
        assert_eq!(unnormalized_density(0.5, 0.0), 1.0);
        assert_eq!(unnormalized_density(0.5, 3.7), 1.0);
        assert_eq!(unnormalized_density(0.0, 2.0), 1.0);
        assert!((unnormalized_density(10.0, 2.0) - 0.01).abs() < 1e-15);
        assert_eq!(unnormalized_density(100.0, 0.0), 1.0);
    }

    #[test]
    fn normalization_uniform_equals_area() {
        for n in [64.0, 4096.0, 1e6] {
            let g = TorusGeometry::from_area(n).unwrap();
            let big_g = normalization_constant(0.0, &g).unwrap();
            assert!((big_g - n).abs() < 1e-8 * n, "G={big_g} vs n={n}");
        }
    }

    #[test]
    fn normalization_large_delta_approaches_disc_limit() {
        let g = TorusGeometry::from_area(1e6).unwrap();
        let big_g = normalization_constant(6.0, &g).unwrap();
        let disc = 2.0 * core::f64::consts::PI * (0.5 + 1.0 / 4.0);
        assert!(
            (big_g - disc).abs() < 0.02 * disc,
            "G={big_g} vs disc limit {disc}"
        );
    }

    #[test]
    fn normalization_scaling_exponent_at_delta_one() {
        let ns: Vec<f64> = (10..=20).step_by(2).map(|e| (1u64 << e) as f64).collect();
        let gs: Vec<f64> = ns
            .iter()
            .map(|&n| {
                normalization_constant(1.0, &TorusGeometry::from_area(n).unwrap()).unwrap()
            })
            .collect();
        let fit = slope_fit(&ns, &gs).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.02, "slope {}", fit.slope);
    }

    #[test]
    fn normalization_log_regime_and_constant_regime() {
        // δ = 2: G / ln n stays in a fixed band.
        for e in [10u32, 14, 20] {
            let n = (1u64 << e) as f64;
            let g = TorusGeometry::from_area(n).unwrap();
            let ratio = normalization_constant(2.0, &g).unwrap() / n.ln();
            assert!((2.6..=3.4).contains(&ratio), "ratio {ratio} at n=2^{e}");
        }
        // δ = 3: G converges to a constant.
        let g18 = normalization_constant(3.0, &TorusGeometry::from_area((1u64 << 18) as f64).unwrap())
            .unwrap();
        let g20 = normalization_constant(3.0, &TorusGeometry::from_area((1u64 << 20) as f64).unwrap())
            .unwrap();
        assert!((g20 - g18).abs() / g20 < 0.02);
    }

    #[test]
    fn shape_rejects_small_resolution() {
        let g = TorusGeometry::from_area(1024.0).unwrap();
        assert!(matches!(
            build_shape(2.0, &g, 512),
            Err(MobilityError::ResolutionTooSmall(512))
        ));
    }

    #[test]
    fn shape_uniform_matches_quadratic_radial_law() {
        let n = 65536.0;
        let g = TorusGeometry::from_area(n).unwrap();
        let shape = build_shape(0.0, &g, 4096).unwrap();
        for rho in [2.0, 10.0, 50.0, 120.0] {
            let expect = core::f64::consts::PI * rho * rho / n;
            let got = shape.radial_cdf(rho);
            assert!((got - expect).abs() < 1e-3, "rho={rho}: {got} vs {expect}");
        }
    }

    #[test]
    fn shape_concentrated_mass_at_unit_distance() {
        let g = TorusGeometry::from_area(1e6).unwrap();
        let shape = build_shape(6.0, &g, 4096).unwrap();
        let expect = core::f64::consts::PI / shape.normalization();
        let got = shape.radial_cdf(1.0);
        assert!((got - expect).abs() < 0.01, "{got} vs {expect}");
        assert!((expect - 0.667).abs() < 0.02);
    }

    #[test]
    fn shape_table_strictly_increasing() {
        let g = TorusGeometry::from_area(4096.0).unwrap();
        for delta in [0.0, 1.0, 2.0, 3.0, 6.0] {
            let shape = build_shape(delta, &g, 1024).unwrap();
            let table: Vec<f64> = shape.table().map(|(_, d)| d).collect();
            for w in table.windows(2) {
                assert!(w[1] > w[0], "delta={delta}: table not strictly increasing");
            }
        }
    }

    #[test]
    fn sampling_matches_tabulated_cdf() {
        let g = TorusGeometry::from_area(65536.0).unwrap();
        let home = g.wrap(100.0, 37.0).unwrap();
        for delta in [0.0, 1.0, 2.0, 3.0, 6.0] {
            let shape = build_shape(delta, &g, 4096).unwrap();
            let mut rng = stream_rng(9, StreamDomain::Mobility, delta as u64);
            let mut dist: Vec<f64> = (0..1_000_000)
                .map(|_| {
                    let p = sample_position(home, &shape, &mut rng);
                    crate::geometry::torus_distance(home, p, &g)
                })
                .collect();
            dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ks = stats::ks_statistic(&dist, |d| shape.radial_cdf(d));
            assert!(ks < 0.005, "delta={delta}: KS={ks}");
        }
    }

    #[test]
    fn sampling_uniform_case_is_uniform_over_cells() {
        let n = 65536.0;
        let g = TorusGeometry::from_area(n).unwrap();
        let shape = build_shape(0.0, &g, 4096).unwrap();
        let home = g.wrap(11.3, 200.0).unwrap();
        let grid = crate::geometry::CellGrid::with_cells_per_axis(&g, 16);
        let mut counts = vec![0u64; 256];
        let mut rng = stream_rng(4, StreamDomain::Mobility, 0);
        let samples = 1_000_000u64;
        for _ in 0..samples {
            let p = sample_position(home, &shape, &mut rng);
            counts[grid.flat_index(grid.index(p)) as usize] += 1;
        }
        let expected = samples as f64 / 256.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let p = stats::chi_square_pvalue(chi2, 255.0);
        assert!(p > 0.01, "chi2={chi2}, p={p}");
    }

    #[test]
    fn sampling_concentrated_case_hits_unit_disc_mass() {
        let g = TorusGeometry::from_area(1e6).unwrap();
        let shape = build_shape(6.0, &g, 4096).unwrap();
        let home = g.wrap(500.0, 500.0).unwrap();
        let mut rng = stream_rng(5, StreamDomain::Mobility, 0);
        let samples = 1_000_000u64;
        let mut within = 0u64;
        for _ in 0..samples {
            let p = sample_position(home, &shape, &mut rng);
            if crate::geometry::torus_distance(home, p, &g) <= 1.0 {
                within += 1;
            }
        }
        let frac = within as f64 / samples as f64;
        let expect = core::f64::consts::PI / shape.normalization();
        assert!((frac - expect).abs() < 0.01, "{frac} vs {expect}");
    }

    #[test]
    fn sampling_angle_is_rotationally_uniform() {
        let g = TorusGeometry::from_area(65536.0).unwrap();
        let side = g.side();
        let shape = build_shape(2.0, &g, 4096).unwrap();
        let home = g.wrap(128.0, 128.0).unwrap();
        let mut rng = stream_rng(6, StreamDomain::Mobility, 0);
        let mut angles: Vec<f64> = Vec::new();
        while angles.len() < 200_000 {
            let p = sample_position(home, &shape, &mut rng);
            let mut dx = p.x() - home.x();
            let mut dy = p.y() - home.y();
            if dx > side / 2.0 {
                dx -= side;
            } else if dx < -side / 2.0 {
                dx += side;
            }
            if dy > side / 2.0 {
                dy -= side;
            } else if dy < -side / 2.0 {
                dy += side;
            }
            let d = (dx * dx + dy * dy).sqrt();
            if d > 0.0 && d < side / 4.0 {
                let a = dy.atan2(dx);
                angles.push(if a < 0.0 { a + core::f64::consts::TAU } else { a });
            }
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = stats::ks_statistic(&angles, |a| a / core::f64::consts::TAU);
        let p = stats::kolmogorov_pvalue(ks, angles.len());
        assert!(p > 0.01, "KS={ks}, p={p}");
    }

    #[test]
    fn reshuffling_is_uncorrelated_across_slots() {
        let g = TorusGeometry::from_area(4096.0).unwrap();
        let shape = build_shape(2.0, &g, 4096).unwrap();
        let home = g.wrap(10.0, 50.0).unwrap();
        let mut rng = stream_rng(7, StreamDomain::Mobility, 3);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_position(home, &shape, &mut rng).x())
            .collect();
        let r = stats::lag1_autocorrelation(&xs);
        assert!(r.abs() < 0.01, "lag-1 autocorrelation {r}");
    }

    #[test]
    fn homes_concentrate_like_their_cell_areas() {
        let n = 4096u32;
        let g = TorusGeometry::from_area(n as f64).unwrap();
        let mut rng = stream_rng(1, StreamDomain::Homes, 0);
        let homes = HomePoints::generate(n, &g, &mut rng).unwrap();
        let cell_side = (n as f64).ln().sqrt();
        let grid = crate::geometry::CellGrid::fit(&g, cell_side).unwrap();
        let mut counts = vec![0u64; grid.cell_count() as usize];
        for &h in homes.as_slice() {
            counts[grid.flat_index(grid.index(h)) as usize] += 1;
        }
        let area = grid.cell_area();
        let (lo, hi) = (0.1 * area, 3.0 * area);
        let ok = counts
            .iter()
            .filter(|&&c| (c as f64) >= lo && (c as f64) <= hi)
            .count();
        assert!(
            ok as f64 >= 0.99 * counts.len() as f64,
            "{ok}/{} cells within [{lo:.2}, {hi:.2}]",
            counts.len()
        );
    }

    #[test]
    fn homes_generation_is_deterministic_and_validated() {
        let g = TorusGeometry::from_area(64.0).unwrap();
        let a = HomePoints::generate(2, &g, &mut stream_rng(3, StreamDomain::Homes, 0)).unwrap();
        let b = HomePoints::generate(2, &g, &mut stream_rng(3, StreamDomain::Homes, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(g.contains(a.get(0)) && g.contains(a.get(1)));
        assert!(matches!(
            HomePoints::generate(1, &g, &mut stream_rng(3, StreamDomain::Homes, 0)),
            Err(MobilityError::TooFewNodes(1))
        ));
    }
}
