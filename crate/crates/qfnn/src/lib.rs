//! Simulation of a variational quantum classifier trained by federated
//! averaging, aimed at small fraud-detection experiments.
//!
//! The crate is organized bottom-up:
//!
//! - [`quantum`]: statevector and density-matrix simulation with Kraus noise
//!   channels,
//! - [`model`]: the angle-encoded variational circuit and its prediction,
//! - [`training`]: MSE loss, shift-rule gradients, Adam, and local training,
//! - [`federated`]: IID sharding, the round loop, aggregation, and the noise
//!   sweep,
//! - [`data`]: CSV ingest/join, preprocessing, balancing, splitting, and a
//!   synthetic generator,
//! - [`metrics`]: confusion-derived scores and history export,
//! - [`validate`]: slow independent oracles the fast paths are checked
//!   against.
//!
//! Every random choice flows from explicit `u64` seeds through ChaCha8
//! streams, so identical configurations produce byte-identical results.

pub mod data;
pub mod error;
pub mod federated;
pub mod metrics;
pub mod model;
pub mod quantum;
pub mod training;
pub mod validate;

pub use error::{Error, Result};
