//! Large-N correlation functions and eigenvalue-density corrections of
//! one-cut beta-ensembles, computed by the refined topological recursion in
//! the Zhukovsky variable, plus a Metropolis eigenvalue sampler for
//! empirical validation.

pub mod cli;
pub mod correlators;
pub mod density;
pub mod error;
pub mod kernel;
pub mod numerics;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use numerics::{Complex, ContourSpec, Jet};
