pub mod config;
pub mod cphase;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod random;
pub mod runner;
pub mod scenario;
pub mod spdc;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
