pub mod cli;
pub mod error;
pub mod exprdsl;
pub mod geometry;
pub mod noether;
pub mod random;
pub mod scalar;
pub mod solutions;
pub mod tensor;
pub mod transforms;
pub mod variational;

pub use error::{Error, Result};
