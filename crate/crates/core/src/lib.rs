//! Simulation and rotation optimization for rotatable intelligent reflecting
//! surface (IRS) links.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: rotation frames, element placement, path angles, feasibility.
//! * [`channel`]: LoS channels, the angle-dependent reflection coefficient,
//!   beamforming and received power.
//! * [`objective`]: the rotation objective surface (single point and area).
//! * [`optimizer`]: closed-form seed, particle swarm and exhaustive search.
//! * [`harness`]: scenario files, benchmark schemes, sweeps and reports.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod objective;
pub mod optimizer;
pub mod units;

pub use error::{Error, Result};
pub use geometry::{ArraySpec, Rotation, Scenario, Vec3};
