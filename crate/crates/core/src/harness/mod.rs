//! Run configuration, end-to-end simulation, studies and CSV output.

pub mod config;
pub mod simulate;
pub mod studies;
pub mod table;

pub use config::{parse_config, Mode, Overrides, SimConfig};
pub use simulate::{simulate_full, Simulation, Trajectory};
pub use table::{read_csv, write_csv, Table, Value};
