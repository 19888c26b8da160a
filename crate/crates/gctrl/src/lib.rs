//! File formats, configuration and orchestration around `gctrl-core`.

pub mod config;
pub mod csvio;
pub mod error;
pub mod runner;
