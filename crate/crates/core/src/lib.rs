//! Manifold learning by evolving multi-tree genetic programs.
//!
//! Each individual is a fixed-size list of expression trees, one per output
//! dimension. Fitness rewards embeddings that keep each instance's nearest
//! neighbour ordering intact, measured on a block-wise subsample of the
//! neighbour list. The [`eval`] module scores embeddings with a stratified
//! k-NN cross-validation and provides a PCA baseline.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod evolution;
pub mod exec;
pub mod fitness;
pub mod gp;
pub mod neighbors;
pub mod viz;

pub use dataset::{Dataset, LabelColumn, Scaling};
pub use error::{Error, Result};
pub use evolution::{EvolutionState, RunConfig};
pub use exec::Execution;
pub use fitness::{AgreementKernel, FitnessContext};
pub use gp::{Embedding, Individual, Op, Tree};
pub use neighbors::NeighborIndex;
