pub mod adapt;
pub mod banded;
pub mod bench;
pub mod encoder;
pub mod error;
pub mod gora;
pub mod io;
pub mod liegroup;
pub mod planner;
pub mod rng;
pub mod workspace;

pub use error::{Error, ErrorClass, Result};
