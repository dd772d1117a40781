pub mod analysis;
pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod geometry;
pub mod harness;
pub mod solver;

pub use error::{Error, Result};
