pub mod cache;
pub mod counting;
pub mod error;
pub mod fixtures;

pub use error::{Error, Result};
