//! Exact MPE inference, mini-bucket upper bounds recast as exact inference on
//! node-split networks, and branch-and-bound MPE search over split variables.

pub mod bench;
pub mod elimination;
pub mod error;
pub mod exact;
pub mod factor;
pub mod graph;
pub mod jointree;
pub mod logspace;
pub mod model;
pub mod search;
pub mod splitting;
pub mod strategies;

/// Dense variable index.
pub type VarId = usize;

pub use error::{Error, Result};
pub use factor::{Factor, Op};
pub use model::{Instantiation, Network, Variable};
