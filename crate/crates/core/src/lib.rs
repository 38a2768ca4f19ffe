//! Sufficient-cause structures on binary causal DAGs.

pub mod covinf;
pub mod error;
pub mod expansion;
pub mod fixtures;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod scm;
pub mod signs;
pub mod sufficient;
pub mod sweep;

pub use error::{Error, Result};
