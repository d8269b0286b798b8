extern crate openblas_src;

pub mod alternation;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod regulation;
pub mod simulate;
pub mod synthesis;
pub mod transforms;
pub use error::{Error, Result};
