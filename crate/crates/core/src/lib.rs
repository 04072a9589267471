pub mod baselines;
pub mod error;
pub mod exact;
pub mod graph;
pub mod harness;
pub mod kernel;
mod mix;
pub mod mrengine;
pub mod sampling;

pub use error::{Error, Result};
