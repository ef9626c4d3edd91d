//! Configuration-driven sweeps over the key-rate engine, result files and
//! summaries.

pub mod ber;
pub mod config;
pub mod error;
pub mod report;
pub mod row;
pub mod sweep;

pub use config::{load_config, parse_config, Axis, GridPoint, SweepConfig};
pub use error::{CliError, Result};
pub use report::{report_best, SummaryRow};
pub use row::{fmt_g, read_rows, write_rows, ResultRow, COLUMNS};
pub use sweep::{run_sweep, run_sweep_to_files, SweepOutcome};
