//! Per-slot scheduling: step selection, step-dependent squarelet
//! tessellations, phased activation of non-interfering cells, and uniform
//! selection of one eligible transmitter-receiver pair per active cell.
//!
//! Each slot is devoted to a single routing step `i`, drawn with probability
//! `p_s[i]` proportional to the squarelet area `A_i` (this equalizes the
//! expected number of parallel transmissions across steps). The torus is
//! tessellated into cells of area ~`A_i`; cells are activated in `M = s²`
//! round-robin phases, with active cells exactly `s` cells apart per axis.
//! Points in distinct active cells are then at least `(s-1)` cell sides
//! apart, which exceeds `(1+Δ)·R` for the phase side chosen by
//! [`phase_side`], so the protocol interference model holds by construction
//! (and is re-verified, not assumed, in test builds).

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // provides f64 math in no_std builds
use num_traits::Float as _;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{classify, z0_constraint, z0_constraint_name, Regime};
use crate::geometry::{torus_distance, CellGrid, TorusGeometry, TorusPoint};
use crate::mobility::HomePoints;
use crate::routing::relay_ring;
use crate::{MessageId, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub enum SchedulingError {
    /// Z0 must lie in [1, sqrt(n)].
    Z0OutOfRange { z0: f64, side: f64 },
    /// Z0 below the regime's admissible floor; the violated constraint is
    /// named.
    Z0BelowFloor {
        z0: f64,
        floor: f64,
        constraint: &'static str,
    },
    /// Slot distribution needs a non-empty list of positive areas.
    EmptyAreas,
    NonPositiveArea(f64),
    /// The transmission range must stay O(Z_i); a violation means the area
    /// constant is out of proportion for this configuration.
    RangeExceedsStep { step: u32, range: f64, z: f64 },
}

impl fmt::Display for SchedulingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulingError::Z0OutOfRange { z0, side } => {
                write!(f, "z0 = {z0} outside [1, sqrt(n) = {side}]")
            }
            SchedulingError::Z0BelowFloor {
                z0,
                floor,
                constraint,
            } => write!(
                f,
                "z0 = {z0} below the regime floor {constraint} = {floor}"
            ),
            SchedulingError::EmptyAreas => write!(f, "slot distribution needs at least one area"),
            SchedulingError::NonPositiveArea(a) => write!(f, "squarelet area must be > 0, got {a}"),
            SchedulingError::RangeExceedsStep { step, range, z } => write!(
                f,
                "step {step}: transmission range {range} exceeds 4·Z_i = {}",
                4.0 * z
            ),
        }
    }
}

/// Minimum squarelet area that keeps a step-`i` cell populated with an
/// eligible pair with non-vanishing probability, times the constant `c`
/// (default 1, fitted empirically elsewhere). Clamped to `[1, n]`.
pub fn squarelet_area(i: u32, delta: f64, n: f64, z0: f64, c: f64) -> f64 {
    let z_i = (2.0f64).powi(i as i32) * z0;
    let raw = match classify(delta) {
        Regime::DeltaLe1 => n.sqrt() / z_i,
        Regime::DeltaIn1To2 => n.powf(0.5 * (2.0 - delta)) / z_i.powf(2.0 - delta),
        Regime::DeltaEq2 => n.ln(),
        _ => z_i.powf(delta - 2.0),
    };
    (c * raw).clamp(1.0, n)
}

/// Largest routing step any message can start at:
/// the greatest `i` with `2^i · z0 <= sqrt(n)`.
pub fn i_max(n: f64, z0: f64) -> Result<u32, SchedulingError> {
    let side = n.sqrt();
    if !(z0 >= 1.0 && z0 <= side) {
        return Err(SchedulingError::Z0OutOfRange { z0, side });
    }
    let mut i = 0u32;
    let mut bound = z0;
    // Doubling is exact in floating point.
    while 2.0 * bound <= side {
        bound *= 2.0;
        i += 1;
    }
    Ok(i)
}

/// Slot-assignment probabilities `p_i = A_i / Σ A_j`.
pub fn slot_distribution(areas: &[f64]) -> Result<Vec<f64>, SchedulingError> {
    if areas.is_empty() {
        return Err(SchedulingError::EmptyAreas);
    }
    let mut sum = 0.0;
    for &a in areas {
        if !(a > 0.0) {
            return Err(SchedulingError::NonPositiveArea(a));
        }
        sum += a;
    }
    Ok(areas.iter().map(|&a| a / sum).collect())
}

/// Phase pattern side `s`: the smallest integer with
/// `(s - 1 - sqrt(2)) · sqrt(A) >= (1 + Δ) · R` for `R = sqrt(2A)`, i.e.
/// `s = ceil(1 + sqrt(2) + (1 + Δ)·sqrt(2))`. Conservative spacing: active
/// cells `s` apart can never violate the protocol model, wherever the
/// endpoints sit inside their cells.
pub fn phase_side(guard: f64) -> u32 {
    assert!(guard >= 0.0, "guard factor must be non-negative");
    let sqrt2 = core::f64::consts::SQRT_2;
    (1.0 + sqrt2 + (1.0 + guard) * sqrt2).ceil() as u32
}

/// Number of activation phases `M = s²` (16 at Δ = 0).
pub fn phase_count(guard: f64) -> u32 {
    let s = phase_side(guard);
    s * s
}

/// Per-step scheduling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub step: u32,
    /// Z_i = 2^i · Z0.
    pub z: f64,
    /// Target squarelet area from the regime formula (constant applied).
    pub area_target: f64,
    /// The fitted tessellation actually used for this step. Its cells-per-
    /// axis count is a multiple of the phase side so that phased activation
    /// is interference-free across the torus seam.
    pub grid: CellGrid,
    /// Common transmission range: the cell diagonal, so any intra-cell pair
    /// is connectable.
    pub range: f64,
    pub slot_prob: f64,
}

/// The full per-run schedule: one `StepParams` per step `0..=i_max`, plus
/// the phase geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTable {
    pub steps: Vec<StepParams>,
    pub phase_side: u32,
    pub phase_count: u32,
}

impl StepTable {
    /// Build and validate the schedule. Configurations whose Z0 violates
    /// the regime floor are rejected with the constraint named.
    pub fn build(
        g: &TorusGeometry,
        delta: f64,
        z0: f64,
        guard: f64,
        area_const: f64,
    ) -> Result<StepTable, SchedulingError> {
        let n = g.area();
        let floor = z0_constraint(delta, n);
        if z0 < floor * (1.0 - 1e-9) {
            return Err(SchedulingError::Z0BelowFloor {
                z0,
                floor,
                constraint: z0_constraint_name(delta),
            });
        }
        let im = i_max(n, z0)?;
        let s = phase_side(guard);
        let areas: Vec<f64> = (0..=im)
            .map(|i| squarelet_area(i, delta, n, z0, area_const))
            .collect();
        let probs = slot_distribution(&areas)?;
        let mut steps = Vec::with_capacity(areas.len());
        for (i, (&area, &p)) in areas.iter().zip(probs.iter()).enumerate() {
            let z = (2.0f64).powi(i as i32) * z0;
            let blocks = (g.side() / (s as f64 * area.sqrt())).round().max(1.0) as u32;
            let grid = CellGrid::with_cells_per_axis(g, s * blocks);
            let range = core::f64::consts::SQRT_2 * grid.cell_side();
            if range > 4.0 * z {
                return Err(SchedulingError::RangeExceedsStep {
                    step: i as u32,
                    range,
                    z,
                });
            }
            steps.push(StepParams {
                step: i as u32,
                z,
                area_target: area,
                grid,
                range,
                slot_prob: p,
            });
        }
        Ok(StepTable {
            steps,
            phase_side: s,
            phase_count: s * s,
        })
    }

    #[inline]
    pub fn i_max(&self) -> u32 {
        self.steps.len() as u32 - 1
    }

    /// Draw a step according to the slot distribution.
    pub fn draw_step<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for p in &self.steps {
            acc += p.slot_prob;
            if u < acc {
                return p.step;
            }
        }
        self.steps.last().unwrap().step
    }
}

/// One slot's activation plan: the step the slot is devoted to and the
/// activation phase (a residue class of cells modulo the phase side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotPlan {
    pub step: u32,
    pub phase: u32,
}

/// Read-only view of the node queues that pair selection needs.
pub trait QueueView {
    /// Head-of-line message of the step-`i` FIFO (`i >= 1`) at `node`,
    /// with its final destination.
    fn head_of_step_queue(&self, node: NodeId, step: u32) -> Option<(MessageId, NodeId)>;
    /// Head of the per-destination step-0 FIFO at `a` for destination `d`.
    fn head_of_dest_queue(&self, a: NodeId, d: NodeId) -> Option<MessageId>;
}

/// An enabled transmission: one per active cell at most.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub tx: NodeId,
    pub rx: NodeId,
    pub msg: MessageId,
    pub cell: (u32, u32),
}

/// Select the pair to enable in one cell, or `None` if the cell holds no
/// eligible pair (head-of-line blocking included: a holder whose current
/// head-of-line message has no co-resident eligible relay contributes no
/// pair).
///
/// Step 0: eligible pairs are co-resident `(a, d)` with home-distance
/// strictly below Z0 and a queued step-0 message at `a` for `d`. Step >= 1:
/// pairs `(a, b)` where `b`'s home lies strictly inside the relay ring of
/// `a`'s head-of-line step-`i` message. One eligible pair is selected
/// uniformly at random.
pub fn select_pair<R: Rng + ?Sized>(
    census: &[NodeId],
    step: u32,
    queues: &impl QueueView,
    homes: &HomePoints,
    z0: f64,
    g: &TorusGeometry,
    rng: &mut R,
) -> Option<(NodeId, NodeId, MessageId)> {
    let mut candidates: Vec<(NodeId, NodeId, MessageId)> = Vec::new();
    if step == 0 {
        for &a in census {
            let h_a = homes.get(a);
            for &d in census {
                if d == a {
                    continue;
                }
                if torus_distance(h_a, homes.get(d), g) < z0 {
                    if let Some(msg) = queues.head_of_dest_queue(a, d) {
                        candidates.push((a, d, msg));
                    }
                }
            }
        }
    } else {
        for &a in census {
            if let Some((msg, dst)) = queues.head_of_step_queue(a, step) {
                let ring = relay_ring(step, z0, homes.get(dst)).expect("step >= 1");
                for &b in census {
                    if b != a && ring.contains(homes.get(b), g) {
                        candidates.push((a, b, msg));
                    }
                }
            }
        }
    }
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.gen_range(0..candidates.len())])
    }
}

/// Scratch buckets for one slot's active cells, reused across slots.
#[derive(Debug, Default)]
pub struct CellBuckets {
    buckets: Vec<Vec<NodeId>>,
}

impl CellBuckets {
    pub fn new() -> Self {
        CellBuckets::default()
    }
}

/// Details of a protocol-model violation (an internal-consistency failure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolViolation {
    pub interferer: NodeId,
    pub receiver: NodeId,
    pub distance: f64,
    pub required: f64,
}

impl fmt::Display for ProtocolViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "interferer {} at distance {} from receiver {} (< required {})",
            self.interferer, self.distance, self.receiver, self.required
        )
    }
}

/// Enabled transmissions for one slot: for every cell of the active phase,
/// at most one uniformly selected eligible pair. The returned set satisfies
/// the protocol interference model by the phase geometry; `verify_protocol`
/// re-checks it exhaustively.
#[allow(clippy::too_many_arguments)]
pub fn enabled_transmissions<R: Rng + ?Sized>(
    positions: &[TorusPoint],
    plan: SlotPlan,
    table: &StepTable,
    queues: &impl QueueView,
    homes: &HomePoints,
    z0: f64,
    g: &TorusGeometry,
    rng: &mut R,
    scratch: &mut CellBuckets,
) -> Vec<Transmission> {
    let params = &table.steps[plan.step as usize];
    let grid = &params.grid;
    let s = table.phase_side;
    let (px, py) = (plan.phase % s, plan.phase / s);
    let blocks = grid.cells_per_axis() / s;
    let n_buckets = (blocks as usize) * (blocks as usize);

    scratch.buckets.resize(n_buckets, Vec::new());
    for b in scratch.buckets.iter_mut() {
        b.clear();
    }
    for (id, &pos) in positions.iter().enumerate() {
        let (cx, cy) = grid.index(pos);
        if cx % s == px && cy % s == py {
            scratch.buckets[((cy / s) * blocks + cx / s) as usize].push(id as NodeId);
        }
    }

    let mut out = Vec::new();
    for (flat, census) in scratch.buckets.iter().enumerate() {
        if census.len() < 2 {
            continue;
        }
        if let Some((tx, rx, msg)) = select_pair(census, plan.step, queues, homes, z0, g, rng) {
            let bx = flat as u32 % blocks;
            let by = flat as u32 / blocks;
            let cell = (px + s * bx, py + s * by);
            debug_assert!(
                torus_distance(positions[tx as usize], positions[rx as usize], g)
                    <= params.range * (1.0 + 1e-12),
                "intra-cell pair exceeds the transmission range"
            );
            out.push(Transmission { tx, rx, msg, cell });
        }
    }
    out
}

/// Exhaustive pairwise protocol-model check: every interfering transmitter
/// must be at distance >= (1 + guard) · range from every other receiver.
pub fn verify_protocol(
    transmissions: &[Transmission],
    positions: &[TorusPoint],
    range: f64,
    guard: f64,
    g: &TorusGeometry,
) -> Result<(), ProtocolViolation> {
    let required = (1.0 + guard) * range;
    for (i, a) in transmissions.iter().enumerate() {
        for (j, b) in transmissions.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = torus_distance(positions[a.tx as usize], positions[b.rx as usize], g);
            if d < required {
                return Err(ProtocolViolation {
                    interferer: a.tx,
                    receiver: b.rx,
                    distance: d,
                    required,
                });
            }
        }
    }
    Ok(())
}
