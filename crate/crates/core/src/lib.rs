//! Heat-bath Glauber dynamics for Ising, Potts and coloring models on trees
//! and hyperbolic balls, with exact spectral analysis, cut-width based upper
//! bounds, test-function lower bounds, block path coupling and decay of
//! correlations.

pub mod bounds;
pub mod decay;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod graph;
mod lanczos;
pub mod model;
pub mod ordering;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use exact::{GeneratorMatrix, GibbsTable, SpectralReport};
pub use graph::Graph;
pub use model::{Configuration, Model};
pub use ordering::LinearOrdering;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
