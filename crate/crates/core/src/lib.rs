//! Random k-uniform hypergraphs under the independent-edge model:
//! star-collision and unit statistics, star-dependent matrices with their
//! unit-contraction quotients, exact spectral-split verification, and
//! seeded Monte Carlo experiments against exact closed-form oracles.
//!
//! Vertices are 0-based everywhere; edges live in ascending
//! colexicographic order and edge identifiers are positions in that order.

pub mod collisions;
pub mod combo;
mod error;
pub mod hypergraph;
pub mod matrix;
pub mod montecarlo;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod star_matrix;
mod util;

pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, VertexStar};
pub use sampler::{RegimeSpec, SampleConfig};
