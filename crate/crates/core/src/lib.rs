pub mod bridge;
pub mod calculus;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod integrator;
pub mod interval;
pub mod oracle;

pub use error::{Error, Result};
