//! Spectra of d-fold random Vandermonde matrices and LMMSE reconstruction of
//! bandlimited fields sampled by lossy sensor networks.
//!
//! Numerical code is generic over [`Real`] (`f32`, `f64`); the asymptotic
//! moment sum also runs over exact rationals. The aliases below fix the
//! scalar for the common cases.

pub mod error;
pub mod interp;
pub mod moments;
pub mod partitions;
pub mod quadrature;
pub mod reconstruct;
pub mod rng;
pub mod scalar;
pub mod scenarios;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{MomentScalar, Real};

pub type Vandermonde = spectral::vandermonde::DFoldVandermonde<f64>;
pub type Vandermonde32 = spectral::vandermonde::DFoldVandermonde<f32>;
pub type Spectrum = spectral::summary::SpectrumSummary<f64>;
pub type Spectrum32 = spectral::summary::SpectrumSummary<f32>;
pub type Field = reconstruct::FieldSpectrum<f64>;
pub type Field32 = reconstruct::FieldSpectrum<f32>;
pub type Moments = moments::MomentTable<f64>;
pub type Moments32 = moments::MomentTable<f32>;
pub type ExactMoment = num_rational::BigRational;
pub type PhaseLaw = std::sync::Arc<dyn spectral::distribution::SamplingDistribution<f64>>;
pub type PhaseLaw32 = std::sync::Arc<dyn spectral::distribution::SamplingDistribution<f32>>;
