//! Monte Carlo estimators that validate the probabilistic building blocks
//! independently of the simulator: the pair-meeting probability, the
//! populated-squarelet probability, the in-cell contention factor, plus
//! ordinary least squares on log-log data for scaling exponents.
//!
//! All estimators are deterministic given (parameters, seed) and report
//! 95% Wilson intervals.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // provides f64 math in no_std builds
use num_traits::Float as _;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{torus_distance, CellGrid, TorusGeometry, TorusPoint};
use crate::mobility::{sample_position, HomePoints, MobilityError, MobilityShape};
use crate::routing::{union_tx_ring, DistanceBand};
use crate::stats::wilson_interval;
use crate::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// Log-log fits need at least 3 points.
    TooFewPoints(usize),
    /// Log-log fits need strictly positive data.
    NonPositiveData,
    LengthMismatch { xs: usize, ys: usize },
    /// Meeting estimates require sqrt(A) < D/4.
    PremiseViolated { cell_side: f64, d_home: f64 },
    /// Home placement at distance D needs D <= side/2.
    DistanceTooLarge { d_home: f64, side: f64 },
    /// Meeting estimates need at least 10^4 trials.
    TooFewTrials(u64),
    /// Populated-probability estimates need >= 100 instances x 100 slots.
    TooFewInstances { instances: u32, slots: u32 },
    Mobility(MobilityError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooFewPoints(n) => write!(f, "need at least 3 points, got {n}"),
            OracleError::NonPositiveData => write!(f, "log-log fit needs positive data"),
            OracleError::LengthMismatch { xs, ys } => {
                write!(f, "mismatched lengths: {xs} xs vs {ys} ys")
            }
            OracleError::PremiseViolated { cell_side, d_home } => write!(
                f,
                "meeting estimate requires sqrt(A) = {cell_side} < D/4 = {}",
                d_home / 4.0
            ),
            OracleError::DistanceTooLarge { d_home, side } => {
                write!(f, "home distance {d_home} exceeds side/2 = {}", side / 2.0)
            }
            OracleError::TooFewTrials(t) => write!(f, "need >= 10000 trials, got {t}"),
            OracleError::TooFewInstances { instances, slots } => write!(
                f,
                "need >= 100 instances x 100 slots, got {instances} x {slots}"
            ),
            OracleError::Mobility(e) => write!(f, "{e}"),
        }
    }
}

impl From<MobilityError> for OracleError {
    fn from(e: MobilityError) -> Self {
        OracleError::Mobility(e)
    }
}

/// A probability estimate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    fn from_counts(successes: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(successes, trials);
        Estimate {
            estimate: successes as f64 / trials as f64,
            ci_lo,
            ci_hi,
            successes,
            trials,
        }
    }
}

/// Ordinary least squares fit of `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
    pub points: u32,
}

/// Fit `y ~ c · x^slope` by least squares on logs. Deterministic; rejects
/// non-positive data and fewer than three points.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit, OracleError> {
    if xs.len() != ys.len() {
        return Err(OracleError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(OracleError::TooFewPoints(xs.len()));
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(OracleError::NonPositiveData);
    }
    let m = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (sse / ((m - 2.0) * sxx)).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        r2,
        points: xs.len() as u32,
    })
}

/// Empirical probability that two nodes whose home-points sit at torus
/// distance `d_home` land in the same cell of area `cell_area` in one slot.
///
/// Both positions are drawn from the mobility shape; the cell grid is
/// anchored at the origin (immaterial by torus symmetry). Requires the
/// analysis premise `sqrt(A) < D/4` and at least 10^4 trials.
pub fn estimate_meeting_probability<R: Rng + ?Sized>(
    d_home: f64,
    cell_area: f64,
    shape: &MobilityShape,
    trials: u64,
    rng: &mut R,
) -> Result<Estimate, OracleError> {
    if trials < 10_000 {
        return Err(OracleError::TooFewTrials(trials));
    }
    let g = *shape.geometry();
    let cell_side = cell_area.sqrt();
    if !(cell_side < d_home / 4.0) {
        return Err(OracleError::PremiseViolated { cell_side, d_home });
    }
    if d_home > g.side() / 2.0 {
        return Err(OracleError::DistanceTooLarge {
            d_home,
            side: g.side(),
        });
    }
    let grid = CellGrid::fit(&g, cell_side).map_err(MobilityError::Geometry)?;
    let h_a = g.wrap(0.37 * g.side(), 0.61 * g.side()).expect("finite");
    let h_b = g.wrap(h_a.x() + d_home, h_a.y()).expect("finite");
    debug_assert!((torus_distance(h_a, h_b, &g) - d_home).abs() < 1e-9);

    let mut successes = 0u64;
    for _ in 0..trials {
        let pa = sample_position(h_a, shape, rng);
        let pb = sample_position(h_b, shape, rng);
        if grid.index(pa) == grid.index(pb) {
            successes += 1;
        }
    }
    Ok(Estimate::from_counts(successes, trials))
}

/// Inverse-transform binomial sampler (exact; expected cost O(1 + n·p)).
fn binomial<R: Rng + ?Sized>(n: u32, p: f64, rng: &mut R) -> u32 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let q = 1.0 - p;
    let mut pmf = q.powi(n as i32);
    let mut cdf = pmf;
    let mut k = 0u32;
    let u: f64 = rng.gen();
    let ratio = p / q;
    while u > cdf && k < n {
        k += 1;
        pmf *= (n - k + 1) as f64 / k as f64 * ratio;
        cdf += pmf;
    }
    k
}

/// Probability that one reshuffle drops a node with home `h` into the given
/// cell rectangle: the integral of φ over the cell.
///
/// Far homes (no density kink inside the cell, slow variation) get a single
/// 3x3 Gauss panel; homes near the cell or near the d = 1 kink are
/// integrated adaptively.
fn cell_occupancy_probability(
    h: TorusPoint,
    rect: (f64, f64, f64, f64),
    shape: &MobilityShape,
    g: &TorusGeometry,
) -> f64 {
    // Quadrature nodes are strictly interior to the cell, hence canonical.
    let phi = |x: f64, y: f64| {
        let p = TorusPoint::new_unchecked(x, y);
        crate::mobility::unnormalized_density(torus_distance(p, h, g), shape.delta())
            / shape.normalization()
    };
    let (x0, y0, x1, y1) = rect;
    let d_min = torus_rect_distance(h, rect, g.side());
    let cs = x1 - x0;
    if d_min > 5.0 * cs && d_min > 2.0 {
        gauss3x3(&phi, x0, y0, x1, y1)
    } else {
        adaptive_rect(&phi, x0, y0, x1, y1, 1e-4, 1e-13, 12)
    }
}

/// Minimum torus distance from a point to an axis-aligned rectangle.
fn torus_rect_distance(p: TorusPoint, rect: (f64, f64, f64, f64), side: f64) -> f64 {
    let (x0, y0, x1, y1) = rect;
    let mut best = f64::INFINITY;
    for sx in [-side, 0.0, side] {
        for sy in [-side, 0.0, side] {
            let px = p.x() + sx;
            let py = p.y() + sy;
            let dx = (x0 - px).max(0.0).max(px - x1);
            let dy = (y0 - py).max(0.0).max(py - y1);
            best = best.min((dx * dx + dy * dy).sqrt());
        }
    }
    best
}

const GL3_NODES: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

fn gauss3x3<F: Fn(f64, f64) -> f64>(f: &F, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    let hx = 0.5 * (x1 - x0);
    let hy = 0.5 * (y1 - y0);
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    let mut sum = 0.0;
    for (i, &xi) in GL3_NODES.iter().enumerate() {
        for (j, &yj) in GL3_NODES.iter().enumerate() {
            sum += GL3_WEIGHTS[i] * GL3_WEIGHTS[j] * f(cx + hx * xi, cy + hy * yj);
        }
    }
    sum * hx * hy
}

fn adaptive_rect<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let coarse = gauss3x3(f, x0, y0, x1, y1);
    let mx = 0.5 * (x0 + x1);
    let my = 0.5 * (y0 + y1);
    let fine = gauss3x3(f, x0, y0, mx, my)
        + gauss3x3(f, mx, y0, x1, my)
        + gauss3x3(f, x0, my, mx, y1)
        + gauss3x3(f, mx, my, x1, y1);
    if (fine - coarse).abs() <= (rel_tol * fine.abs()).max(abs_tol) || depth == 0 {
        return fine;
    }
    let t = abs_tol / 4.0;
    adaptive_rect(f, x0, y0, mx, my, rel_tol, t, depth - 1)
        + adaptive_rect(f, mx, y0, x1, my, rel_tol, t, depth - 1)
        + adaptive_rect(f, x0, my, mx, y1, rel_tol, t, depth - 1)
        + adaptive_rect(f, mx, my, x1, y1, rel_tol, t, depth - 1)
}

/// Per-slot lists of the nodes present in one reference cell, over
/// `slots` reshuffles of a fixed home-point instance.
///
/// Node presences are independent Bernoulli(q_i) across nodes and slots
/// (positions are redrawn independently every slot), so the occupant sets
/// can be sampled exactly from the per-node occupancy probabilities: draw
/// each node's presence count Binomial(slots, q_i) and scatter it over
/// distinct slots.
fn cell_presence_schedule<R: Rng + ?Sized>(
    homes: &HomePoints,
    shape: &MobilityShape,
    grid: &CellGrid,
    cell: (u32, u32),
    slots: u32,
    rng: &mut R,
) -> Vec<Vec<NodeId>> {
    let g = shape.geometry();
    let cs = grid.cell_side();
    let rect = (
        cell.0 as f64 * cs,
        cell.1 as f64 * cs,
        (cell.0 + 1) as f64 * cs,
        (cell.1 + 1) as f64 * cs,
    );
    let cell_area = cs * cs;
    let mut schedule: Vec<Vec<NodeId>> = (0..slots).map(|_| Vec::new()).collect();
    let mut chosen: Vec<u32> = Vec::new();
    for (id, &h) in homes.as_slice().iter().enumerate() {
        // Cheap upper bound: density is non-increasing in distance.
        let d_min = torus_rect_distance(h, rect, g.side());
        let q_ub = cell_area
            * crate::mobility::unnormalized_density(d_min, shape.delta())
            / shape.normalization();
        if q_ub < 1e-14 {
            continue;
        }
        let q = cell_occupancy_probability(h, rect, shape, g).clamp(0.0, 1.0);
        let k = binomial(slots, q, rng);
        if k == 0 {
            continue;
        }
        chosen.clear();
        if k as usize * 4 < slots as usize {
            // Rejection with linear dedup: k is small.
            while chosen.len() < k as usize {
                let s = rng.gen_range(0..slots);
                if !chosen.contains(&s) {
                    chosen.push(s);
                }
            }
        } else {
            // Partial Fisher-Yates over all slots.
            let mut idx: Vec<u32> = (0..slots).collect();
            for j in 0..k as usize {
                let r = rng.gen_range(j..slots as usize);
                idx.swap(j, r);
            }
            chosen.extend_from_slice(&idx[..k as usize]);
        }
        for &s in chosen.iter() {
            schedule[s as usize].push(id as NodeId);
        }
    }
    schedule
}

/// Does this census contain an eligible pair, i.e. two distinct present
/// nodes whose home-distance lies in the band?
fn census_has_pair(
    census: &[NodeId],
    homes: &HomePoints,
    band: DistanceBand,
    g: &TorusGeometry,
) -> bool {
    for (k, &a) in census.iter().enumerate() {
        let ha = homes.get(a);
        for &b in &census[k + 1..] {
            if band.contains(torus_distance(ha, homes.get(b), g)) {
                return true;
            }
        }
    }
    false
}

/// Home-distance band of the eligible pairs at a given step: the analysis
/// band `[Z0/2, 3·Z0/4]` at the last step, the union-of-rings band
/// `[Z_i/8, 11·Z_i/8]` for i >= 1.
pub fn eligible_pair_band(step: u32, z0: f64) -> DistanceBand {
    if step == 0 {
        DistanceBand {
            lo: 0.5 * z0,
            hi: 0.75 * z0,
        }
    } else {
        union_tx_ring(step, z0).expect("step >= 1")
    }
}

/// Fraction of slots in which a reference cell of area `cell_area` contains
/// an eligible pair for the given step, over fresh home-point instances.
///
/// The reference cell defaults to the grid origin; torus symmetry makes the
/// placement immaterial (spot-checked in tests at a second location).
#[allow(clippy::too_many_arguments)]
pub fn estimate_populated_probability<R: Rng + ?Sized>(
    step: u32,
    shape: &MobilityShape,
    z0: f64,
    cell_area: f64,
    cell: (u32, u32),
    instances: u32,
    slots_per_instance: u32,
    rng: &mut R,
) -> Result<Estimate, OracleError> {
    if instances < 100 || slots_per_instance < 100 {
        return Err(OracleError::TooFewInstances {
            instances,
            slots: slots_per_instance,
        });
    }
    let g = *shape.geometry();
    let n = g.area().round() as u32;
    let grid = CellGrid::fit(&g, cell_area.sqrt()).map_err(MobilityError::Geometry)?;
    let band = eligible_pair_band(step, z0);
    let mut successes = 0u64;
    let mut trials = 0u64;
    for _ in 0..instances {
        let homes = HomePoints::generate(n, &g, rng)?;
        let schedule = cell_presence_schedule(&homes, shape, &grid, cell, slots_per_instance, rng);
        for census in &schedule {
            trials += 1;
            if census.len() >= 2 && census_has_pair(census, &homes, band, &g) {
                successes += 1;
            }
        }
    }
    Ok(Estimate::from_counts(successes, trials))
}

/// One cell's occupants for one slot: the homes of the present nodes.
pub type CellCensus = Vec<TorusPoint>;

/// Sample censuses of a reference cell (same machinery as the populated-
/// probability estimator), for feeding [`estimate_pbeta`].
pub fn sample_cell_censuses<R: Rng + ?Sized>(
    shape: &MobilityShape,
    cell_area: f64,
    instances: u32,
    slots_per_instance: u32,
    rng: &mut R,
) -> Result<Vec<CellCensus>, OracleError> {
    let g = *shape.geometry();
    let n = g.area().round() as u32;
    let grid = CellGrid::fit(&g, cell_area.sqrt()).map_err(MobilityError::Geometry)?;
    let mut censuses = Vec::new();
    for _ in 0..instances {
        let homes = HomePoints::generate(n, &g, rng)?;
        let schedule = cell_presence_schedule(&homes, shape, &grid, (0, 0), slots_per_instance, rng);
        for census in schedule {
            censuses.push(census.iter().map(|&id| homes.get(id)).collect());
        }
    }
    Ok(censuses)
}

/// Empirical probability that a tagged eligible pair wins the uniform
/// in-cell selection, under saturated queues (every present node assumed
/// backlogged, so every band-pair of co-residents contends; pairs are
/// unordered since either endpoint could act as the transmitter).
pub fn estimate_pbeta<R: Rng + ?Sized>(
    censuses: &[CellCensus],
    band: DistanceBand,
    g: &TorusGeometry,
    rng: &mut R,
) -> Estimate {
    let mut eligible_slots = 0u64;
    let mut successes = 0u64;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for census in censuses {
        pairs.clear();
        for a in 0..census.len() {
            for b in a + 1..census.len() {
                if band.contains(torus_distance(census[a], census[b], g)) {
                    pairs.push((a, b));
                }
            }
        }
        if pairs.is_empty() {
            continue;
        }
        eligible_slots += 1;
        let tagged = rng.gen_range(0..pairs.len());
        let selected = rng.gen_range(0..pairs.len());
        if tagged == selected {
            successes += 1;
        }
    }
    Estimate::from_counts(successes, eligible_slots.max(1))
}
