//! Configuration, runners and file formats for the `ustat-boot` command
//! line.
//!
//! The core crate stays IO-free; everything that touches JSON configs, CSV
//! artifacts or process arguments lives here.

pub mod config;
pub mod output;

pub use config::{KernelConfig, ProcessConfig, RunConfig};
pub use output::{write_csv, write_json, TableRow};
