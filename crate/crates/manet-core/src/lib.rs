//! Core library for a slot-based mobile ad-hoc network simulator with
//! power-law restricted mobility, plus the analytic scaling-law toolkit
//! and the Monte Carlo estimators used to validate it.
//!
//! The crate is `no_std` (with `alloc`): everything here is pure
//! computation over seeded random streams. File formats, configuration
//! and the command-line front-end live in the companion `manet-cli` crate.
//!
//! Module map:
//!
//! * [`geometry`] — torus coordinates, wrap-around distance, cell grids.
//! * [`mobility`] — the power-law spatial shape around home-points,
//!   its normalization constant and inverse-CDF position sampling.
//! * [`routing`] — bisection routing: step computation, relay rings,
//!   eligibility and message advancement.
//! * [`scheduling`] — per-slot step selection, squarelet tessellation,
//!   phased cell activation and eligible-pair selection.
//! * [`simcore`] — the slot-by-slot engine: traffic, queues, metrics.
//! * [`analysis`] — closed-form throughput/delay/power scaling laws.
//! * [`oracle`] — Monte Carlo estimators and log-log slope fitting.
//! * [`stats`] — small statistical helpers (Wilson intervals, KS,
//!   chi-square) shared by the oracle module and the test suites.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod geometry;
pub mod mobility;
pub mod oracle;
pub mod routing;
pub mod rng;
pub mod scheduling;
pub mod simcore;
pub mod stats;

mod quad;

/// Node identifier: index into the home-point vector.
pub type NodeId = u32;

/// Message identifier, unique within a run.
pub type MessageId = u64;

/// Slot sequence number.
pub type Slot = u64;
