//! Configuration parsing, parameter sweeps, figure presets, certification
//! runs and CSV output for the `cqed` command.

pub mod config;
pub mod csv;
pub mod error;
pub mod presets;
pub mod sweep;
pub mod validate;

pub use config::{parse_config, RunConfig, SweepSpec};
pub use csv::ConcurrenceRecord;
pub use error::{CliError, Result};
pub use presets::{run_preset, Preset};
pub use sweep::{run_sweep, RunOptions};
pub use validate::{validate, Level, Report};
