//! Scenario runner for the `fpfn-market` duopoly model.
//!
//! Each subcommand reads a TOML scenario, calls the library and renders the
//! result as CSV plus a plain-text summary. No model arithmetic lives here.

pub mod config;
pub mod equilibrium;
pub mod invest;
pub mod output;
pub mod sweep;
pub mod verify;
pub mod welfare;

pub use config::{ConfigError, ScenarioConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VALIDATION: u8 = 1;
    pub const VERIFY_FAILED: u8 = 2;
    pub const SOLVER: u8 = 3;
}
