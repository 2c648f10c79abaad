//! Pseudo-density operators for two qubits: construction, pseudo-channel
//! recovery, spatial and temporal causal classification, and simulated
//! measurement reconstruction.

pub mod atemporality;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod pdo;
pub mod pseudo_channel;

pub use atemporality::{classify, CausalReport, Region, Tolerances};
pub use error::{Error, Result};
pub use pdo::{Direction, Pdo, TemporalSpec};
