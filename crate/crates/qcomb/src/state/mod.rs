//! Gaussian-state covariances, spectral band partitions, and the squeezing
//! model linking supermodes to band measurements.

pub mod bands;
pub mod covariance;
pub mod squeezing;

pub use bands::BandPartition;
pub use covariance::{min_symplectic_pair, CovarianceState};
pub use squeezing::{calibrate, ModeSqueezing, Quadrature, SqueezingSpectrum};
