//! Linear space-time block codes over quasi-static Rayleigh MIMO channels.
//!
//! The crate builds linear STBCs from their weight matrices, measures their
//! minimum determinants, checks the two determinant criteria for DMT
//! optimality, decodes them with an exact sphere decoder and estimates error
//! and outage exponents by Monte-Carlo simulation.
//!
//! Module map:
//!
//! - [`linalg`]: small dense complex/real matrices and the realification maps.
//! - [`constellations`]: PAM, QAM, HEX and rotated signal sets.
//! - [`stbc`]: weight-matrix codes, generator matrices, the code catalog and
//!   SNR-indexed schemes.
//! - [`nvd`]: minimum-determinant searches and criterion verdicts.
//! - [`decoder`]: real-equivalent channel, exhaustive ML and sphere decoding.
//! - [`simulator`]: channel sampling, outage and error probability, slopes.
//! - [`dmt`]: optimal DMT curve, water-filling KKT solver and exponent minimization.
//! - [`report`]: CSV and JSON output records.

pub mod constellations;
pub mod decoder;
pub mod dmt;
mod error;
pub mod linalg;
pub mod nvd;
pub mod report;
pub mod simulator;
pub mod stats;
pub mod stbc;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{CMat, RMat};
pub use num_complex::Complex64;
pub use stbc::{GeneratorMatrix, LinearStbc, SchemeConfig};

/// Converts a value in decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
