//! Vandermonde matrices, their empirical spectra, and the `η`-transform.

pub mod distribution;
pub mod vandermonde;
pub mod summary;
pub mod eta;
