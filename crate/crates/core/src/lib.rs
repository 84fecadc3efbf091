pub mod dgp;
pub mod error;
pub mod forecast;
pub mod gibbs;
pub mod harness;
pub mod linalg;
pub mod margins;
pub mod numerics;
pub mod random;
pub mod scoring;
pub mod stationary;

pub use error::{DgfcError, Result};
