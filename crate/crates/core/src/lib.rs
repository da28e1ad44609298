pub mod actualization;
pub mod catalog;
pub mod decoherence;
pub mod error;
pub mod measurement;
pub mod numfmt;
pub mod operator;
pub mod propensity;
pub mod systems;

pub use error::{Error, Result};
