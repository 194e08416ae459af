pub mod cli;
pub mod error;
pub mod oracle;
pub mod presentation;
pub mod residue;
pub mod tensor;
pub mod weyl;

pub use error::{HeckeError, Result};
