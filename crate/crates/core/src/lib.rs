//! Numerical laboratory for parabolic shearing witnesses in homogeneous and
//! skew-product flows.

pub mod dd;
pub mod error;
pub mod flow;
pub mod horo;
pub mod lie;
pub mod matrix;
pub mod cq;
pub mod quad;
pub mod report;
pub mod sigma;
pub mod skew;
pub mod sum;

pub use error::{Error, Result};
pub use matrix::SquareMatrix;
