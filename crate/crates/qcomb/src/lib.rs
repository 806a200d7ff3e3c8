//! Multimode Gaussian states of a synchronously pumped optical parametric
//! oscillator below threshold.
//!
//! The crate is organized bottom-up:
//!
//! * [`comb`]: frequency grid, pump and phase-matching spectra, and the
//!   supermode decomposition of the coupling kernel.
//! * [`state`]: quadrature covariance matrices, spectral band partitions,
//!   and the squeezing model that maps supermodes onto band covariances.
//! * [`witness`]: Duan, EPR-reduction, and PPT entanglement witnesses over
//!   band bipartitions.
//! * [`pipeline`]: homodyne-trace synthesis and ingestion, covariance
//!   assembly from pairwise measurements, Monte Carlo resampling, and
//!   uncorrelated-mode extraction.
//! * [`io`]: CSV/JSON readers and writers for every artifact the pipeline
//!   produces or consumes.
//! * [`presets`]: ready-made model configurations.
//!
//! Numerical kernels are generic over the scalar type through [`scalar::Scalar`];
//! the aliases below fix `f64` for the common case.

pub use nalgebra;

pub mod comb;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod presets;
pub mod scalar;
pub mod state;
pub mod witness;

pub use error::{Error, Result};

/// `f64` frequency grid.
pub type FrequencyGrid = comb::grid::FrequencyGrid<f64>;
/// `f64` coupling kernel.
pub type CouplingKernel = comb::coupling::CouplingKernel<f64>;
/// `f64` pump spectrum.
pub type PumpShape = comb::spectra::PumpShape<f64>;
/// `f64` phase-matching acceptance.
pub type PhaseMatching = comb::spectra::PhaseMatching<f64>;
/// `f64` supermode basis.
pub type SupermodeBasis = comb::supermode::SupermodeBasis<f64>;
/// `f64` covariance state.
pub type CovarianceState = state::covariance::CovarianceState<f64>;
/// `f64` band partition.
pub type BandPartition = state::bands::BandPartition<f64>;
/// `f64` squeezing spectrum.
pub type SqueezingSpectrum = state::squeezing::SqueezingSpectrum<f64>;
