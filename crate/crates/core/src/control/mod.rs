//! Altitude controllers and the shared attitude loop.

pub mod attitude;
pub mod gctrl;
pub mod pid;

pub use attitude::{attitude_hold, AttitudeCommand, AttitudeGains, AxisGains};
pub use gctrl::{GController, GControllerConfig, GTick};
pub use pid::{Pid, PidGains, PidOutput};
