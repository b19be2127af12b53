extern crate blas_src;

pub mod channels;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod limits;
pub mod linalg;
pub mod semigroup;

pub use error::{Error, Result};
