//! Term-sparsity SOS relaxations for polynomial optimization, with an
//! integer-programming refinement of the block structure.

pub mod bench;
pub mod error;
pub mod graph;
pub mod ip;
pub mod pipeline;
pub mod poly;
pub mod refine;
pub mod sdp;
pub mod tssos;

pub use error::{Error, Result};
pub use num_rational::BigRational;
