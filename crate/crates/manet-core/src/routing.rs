//! Bisection routing: step computation, relay rings and message advancement.
//!
//! A message directed to destination `d` is in *step* `i` while its holder's
//! home-point lies at home-distance in `(2^{i-1}·Z0, 2^i·Z0]` from `H_d`
//! (step 0 once the distance is at most `Z0`). In step `i >= 1` it may be
//! forwarded to any node whose home-point falls strictly inside the relay
//! ring `(2^{i-2}·Z0, (3/4)·2^{i-1}·Z0)` around `H_d`; since the ring's outer
//! radius sits strictly below `2^{i-1}·Z0`, every forward lands exactly one
//! step closer, so a message born in step `i` is delivered after `i + 1`
//! transmissions.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{torus_distance, TorusGeometry, TorusPoint};
use crate::mobility::HomePoints;
use crate::{MessageId, NodeId, Slot};

/// Fraction γ of `2^{i-1}·Z0` bounding the relay ring from above. Fixed at
/// 3/4; results are order-insensitive to any γ in (1/2, 1).
pub const RING_GAMMA: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoutingError {
    /// Step 0 targets the destination itself; it has no relay ring.
    StepZeroHasNoRing,
    /// `advance` was handed a node that is not an eligible relay.
    IneligibleRelay { msg: MessageId, relay: NodeId },
    /// `advance` on an already delivered message.
    AlreadyDelivered(MessageId),
}

impl fmt::Display for RoutingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingError::StepZeroHasNoRing => write!(f, "step 0 has no relay ring"),
            RoutingError::IneligibleRelay { msg, relay } => {
                write!(f, "node {relay} is not an eligible relay for message {msg}")
            }
            RoutingError::AlreadyDelivered(m) => write!(f, "message {m} already delivered"),
        }
    }
}

/// A single-copy message and its routing state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub src: NodeId,
    pub dst: NodeId,
    /// Current routing step; only ever decreases.
    pub step: u32,
    /// Transmissions so far (relay hops plus the final delivery).
    pub hops: u32,
    pub created_slot: Slot,
    pub delivered_slot: Option<Slot>,
}

impl Message {
    pub fn new(id: MessageId, src: NodeId, dst: NodeId, step: u32, created_slot: Slot) -> Self {
        Message {
            id,
            src,
            dst,
            step,
            hops: 0,
            created_slot,
            delivered_slot: None,
        }
    }
}

/// Routing step of a holder at home-distance `d_home` from the destination's
/// home-point: 0 if `d_home <= z0`, else the unique `i >= 1` with
/// `2^{i-1}·z0 < d_home <= 2^i·z0` (the measure-zero boundary joins the
/// lower step).
pub fn compute_step(d_home: f64, z0: f64) -> u32 {
    assert!(z0 > 0.0 && d_home >= 0.0);
    let mut step = 0u32;
    let mut bound = z0;
    // Doubling is exact in floating point, so boundary cases are stable.
    while d_home > bound {
        bound *= 2.0;
        step += 1;
    }
    step
}

/// The annulus around a destination home-point from which the next relay's
/// home-point must come.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayRing {
    pub center: TorusPoint,
    pub inner: f64,
    pub outer: f64,
}

impl RelayRing {
    /// Strict containment test on home-points.
    #[inline]
    pub fn contains(&self, home: TorusPoint, g: &TorusGeometry) -> bool {
        let d = torus_distance(self.center, home, g);
        d > self.inner && d < self.outer
    }
}

/// Relay ring for step `i_star >= 1`:
/// inner `2^{i*-2}·z0`, outer `(3/4)·2^{i*-1}·z0`.
pub fn relay_ring(i_star: u32, z0: f64, h_dst: TorusPoint) -> Result<RelayRing, RoutingError> {
    if i_star == 0 {
        return Err(RoutingError::StepZeroHasNoRing);
    }
    let scale = pow2(i_star as i32 - 2);
    Ok(RelayRing {
        center: h_dst,
        inner: scale * z0,
        outer: RING_GAMMA * 2.0 * scale * z0,
    })
}

#[inline]
fn pow2(e: i32) -> f64 {
    if e >= 0 {
        (1u64 << e) as f64
    } else {
        1.0 / (1u64 << (-e)) as f64
    }
}

/// A closed band of home-distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBand {
    pub lo: f64,
    pub hi: f64,
}

impl DistanceBand {
    #[inline]
    pub fn contains(&self, d: f64) -> bool {
        d >= self.lo && d <= self.hi
    }
}

/// Union over all destination placements of the step-`i` relay rings, seen
/// from the transmitter's home-point: every candidate relay for a step-`i`
/// message held at `a` satisfies `Z_i/8 <= d^H_ab <= (11/8)·Z_i` with
/// `Z_i = 2^i·z0`. Used for analysis and for oracle counting of candidate
/// relays.
pub fn union_tx_ring(i: u32, z0: f64) -> Result<DistanceBand, RoutingError> {
    if i == 0 {
        return Err(RoutingError::StepZeroHasNoRing);
    }
    let z_i = pow2(i as i32) * z0;
    Ok(DistanceBand {
        lo: z_i / 8.0,
        hi: 11.0 * z_i / 8.0,
    })
}

/// Eligibility of node `b` to receive `msg` from its current holder.
///
/// For step `i >= 1`, `b`'s home-point must lie strictly inside the relay
/// ring around the destination's home-point; for step 0 the only eligible
/// receiver is the destination node itself.
pub fn is_eligible_relay(
    b: NodeId,
    msg: &Message,
    homes: &HomePoints,
    z0: f64,
    g: &TorusGeometry,
) -> bool {
    if msg.step == 0 {
        return b == msg.dst;
    }
    let ring = relay_ring(msg.step, z0, homes.get(msg.dst)).expect("step >= 1");
    ring.contains(homes.get(b), g)
}

/// Hand the message to an eligible relay (step decrements by exactly one)
/// or, at step 0, to the destination (records the delivery slot). The hop
/// counter tracks every transmission.
pub fn advance(
    msg: Message,
    receiver: NodeId,
    homes: &HomePoints,
    z0: f64,
    g: &TorusGeometry,
    slot: Slot,
) -> Result<Message, RoutingError> {
    if msg.delivered_slot.is_some() {
        return Err(RoutingError::AlreadyDelivered(msg.id));
    }
    if !is_eligible_relay(receiver, &msg, homes, z0, g) {
        return Err(RoutingError::IneligibleRelay {
            msg: msg.id,
            relay: receiver,
        });
    }
    let mut next = msg;
    next.hops += 1;
    if msg.step == 0 {
        next.delivered_slot = Some(slot);
    } else {
        next.step -= 1;
        debug_assert_eq!(
            compute_step(torus_distance(homes.get(receiver), homes.get(msg.dst), g), z0),
            next.step,
            "relay ring must land exactly one step closer"
        );
    }
    Ok(next)
}
