pub mod dataset;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
