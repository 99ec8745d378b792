//! Configuration-driven driver for `westervelt-core` simulations.
//!
//! A run loads a mesh, builds the discrete Laplacian and material field,
//! then alternates stepping and source injection while writing VTK
//! snapshots, a CSV probe series and a plain-text manifest.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, SimulationConfig};
pub use output::{read_snapshot, write_probe, write_snapshot, Manifest, ProbeRecord, Snapshot};
pub use run::{prepare, run_simulation, RunError, RunSummary};
