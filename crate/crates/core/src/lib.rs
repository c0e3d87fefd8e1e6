pub mod cb;
pub mod choi;
mod compile;
pub mod error;
pub mod herm;
pub mod indices;
pub mod opsys;
pub mod random;
pub mod sdp;
pub mod theta;

pub use error::{Error, Result};
pub use {nalgebra, num_complex};
