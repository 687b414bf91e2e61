//! Energy-minimal joint sensing and transmission rate scheduling.
//!
//! A device must sense data and upload it to a server so that every task's
//! data volume is delivered before its deadline, while sensing is blacked out
//! during a busy interval. Sensing power grows quadratically with the sensing
//! rate and transmission power exponentially with the transmission rate, so
//! the cheapest schedules are the "taut string" (shortest piecewise-linear)
//! cumulative curves through the feasible region. This crate implements:
//!
//! * [`sp`] — the three string-pulling kernels: shortest cumulative path
//!   above a demand floor, inside a floor/ceiling tunnel, and under a
//!   sliding receiver-buffer ceiling;
//! * [`height`] — search bounds, critical-height enumeration and per-area
//!   convex optimization for the height `h` (data sensed before the busy
//!   interval starts), the scalar that decouples the two schedules;
//! * [`solve`] — fixed-height schedulers, the global optimizers for the
//!   infinite- and finite-buffer cases, and the UB/LB/RH baselines;
//! * [`model`] — scenario types, energy functionals and a full feasibility
//!   checker;
//! * [`oracle`] — an independent slot-discretized convex solver and a tiny
//!   brute-force enumerator used to validate the analytic results.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm` for builds without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod height;
pub mod model;
pub mod oracle;
pub mod solve;
pub mod sp;

mod math;
mod num;

pub use model::{
    build_epoch_grid, check_feasibility, sensing_energy, transmission_energy, BusyInterval,
    EpochGrid, FeasibilityReport, PhysicalParams, RateSchedule, Scenario, ScenarioError, Segment,
    Task,
};
pub use solve::{
    baseline, optimize, optimize_buffered, rates_for_height, rates_for_height_buffered,
    BaselineScheme, Scheme, SolveError, Solution,
};
