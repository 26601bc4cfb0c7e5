pub mod acquisition;
pub mod campaign;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod space;
pub mod stats;
pub mod surrogate;

pub use error::{Error, Result};
