//! Spin-glass disorder chaos: hypergraph models, Gibbs computations,
//! Fourier–Hermite coefficients and chaos-curve experiments.

pub mod chaos;
pub mod disorder;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod gibbs;
pub mod hermite;
pub mod hypergraph;
pub mod numerics;
pub mod randgraph;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hypergraph::{Hypergraph, MultiIndex, SubHypergraph};
pub use rng::{StreamRng, StreamSeed};
pub use stats::Estimate;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
