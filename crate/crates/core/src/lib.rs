//! Closed-loop altitude control of a simulated hexacopter.
//!
//! The crate contains the whole algorithmic side of the simulator and is
//! `no_std` (it needs `alloc` for the growing rule base):
//!
//! * [`rotor`]: per-rotor thrust, induced velocity, torque and power.
//! * [`rigid_body`]: 6-DOF rigid-body equations with quaternion attitude and RK4.
//! * [`plant`]: six rotors on a hexagonal frame, control mixing and the plant step.
//! * [`fuzzy`]: Takagi-Sugeno inference with multivariate Gaussian premises.
//! * [`evolution`]: online rule growing, pruning and winner adaptation.
//! * [`smc`]: sliding surface and the sliding-mode consequent adaptation.
//! * [`control`]: the evolving G-controller, the PID baseline and the attitude hold loop.
//! * [`trajectory`], [`sim`], [`metrics`]: references, the closed-loop runner and
//!   tracking metrics.
//!
//! File formats, configuration parsing and the command line live in the `gctrl`
//! companion crate.
#![no_std]
// `!(x > 0.0)` is how NaN gets rejected alongside the range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod control;
pub mod error;
pub mod evolution;
pub mod fuzzy;
mod math;
pub mod metrics;
pub mod plant;
pub mod rigid_body;
pub mod rotor;
pub mod sim;
pub mod smc;
pub mod trajectory;

pub use error::{Error, Result};
