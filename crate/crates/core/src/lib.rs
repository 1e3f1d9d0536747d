//! Scheduling core for running quantum-circuit jobs on a fleet of modular
//! QPUs that can cut oversized (or opportunistically, large) circuits into
//! fragments executed either with local operations only (LO) or with
//! classical feed-forward between modules (LOCC).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the event
//! trace codec and the command-line front end live in the `cutsched` crate.
//!
//! Module map:
//!
//! - [`workload`]: circuit/job model, shot rule, seeded workload generators.
//! - [`cutplan`]: bipartition search, sampling overheads, sub-job expansion,
//!   classical delay between LOCC fragments.
//! - [`fleet`]: device model, default fleet, runtime and LPST estimators.
//! - [`grouping`]: greedy co-execution grouping and the group cost.
//! - [`scheduler`]: list scheduling with precedence, slot accounting and the
//!   adaptive cut loop.
//! - [`sim`]: discrete-event simulation of a queued fleet and its metrics.
//! - `oracles` (feature `oracles`): brute-force references for tests.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod cutplan;
mod error;
pub mod fleet;
pub mod grouping;
#[cfg(feature = "oracles")]
pub mod oracles;
pub mod scheduler;
#[cfg(feature = "oracles")]
pub mod selfcheck;
pub mod sim;
pub mod workload;

pub use crate::error::{Error, Result};

/// Durations and timestamps, in seconds.
pub type Seconds = f64;
