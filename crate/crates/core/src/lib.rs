//! Residential space-cooling carbon intensity: bottom-up appliance model,
//! shift/slack structural decomposition of its changes, and decarbonization
//! metrics built on the decomposition.

pub mod decomp;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pipeline;

pub use error::{Error, Result};
