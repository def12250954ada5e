//! Toeplitz and Hankel random matrices with moving-average entries: simulation,
//! limiting-moment theory, exact trace-formula checks and experiment drivers.

pub mod combinatorics;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod moments;
pub mod report;
pub mod seed;
pub mod spectra;
pub mod trace_validate;

pub use error::{LabError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
