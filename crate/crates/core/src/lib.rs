//! Robust phase estimation (RPE) for single-qubit gate calibration.
//!
//! The crate covers the whole pipeline: gate and SPAM models as Pauli
//! transfer matrices ([`ptm`]), RPE and GST experiment designs
//! ([`sequences`]), seeded dataset simulation and subsampling
//! ([`simulator`]), the range-restriction estimator ([`estimator`]), analytic
//! RMSE bounds and power-law fits ([`bounds`]), Monte Carlo scaling studies
//! ([`analysis`]) and the JSON/CSV file formats ([`io`]).

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod bounds;
pub mod eigen;
pub mod error;
pub mod estimator;
pub mod io;
pub mod ptm;
pub mod sequences;
pub mod simulator;

pub use error::{Error, Result};
