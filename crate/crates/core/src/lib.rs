//! Local causal structure learning and causal relation identification in
//! maximally oriented partially directed acyclic graphs.

pub mod bench;
pub mod causal;
pub mod ci;
pub mod error;
pub mod graph;
pub mod local;
pub mod mb;
pub mod metrics;
pub mod sim;

pub use error::{Error, Result};
