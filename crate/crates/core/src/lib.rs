pub mod cli;
pub mod contamination;
pub mod depth;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod io;
pub mod limit;
pub mod models;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
