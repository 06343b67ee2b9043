//! Library surface of the simulator CLI, exposed so integration tests can
//! drive the commands without spawning processes.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{
    cmd_entropy, cmd_oracle_audit, cmd_plateau, cmd_self_verify, cmd_simulate, cmd_sweep,
    AuditReport, PlateauRow, RangeSpec, SimulateOptions,
};
pub use config::RunConfig;
pub use error::CliError;
pub use output::{Manifest, OutputBundle};
