//! Hybrid quantum-classical GAN for generating edge-weight vectors of
//! complete four-node graphs under Euclidean constraints.

pub mod ansatz;
pub mod dataset;
pub mod error;
pub mod k4;
pub mod metrics;
pub mod nets;
pub mod statevector;
pub mod trainer;

pub use error::{Error, Result};
