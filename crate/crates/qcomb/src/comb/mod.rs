//! Frequency-comb geometry, pump/phase-matching spectra, and the supermode
//! decomposition of the downconversion coupling kernel.

pub mod coupling;
pub mod grid;
pub mod hermite;
pub mod spectra;
pub mod supermode;

pub use coupling::CouplingKernel;
pub use grid::FrequencyGrid;
pub use spectra::{
    amplitude_std_from_intensity_fwhm_nm, lo_amplitude, wavelength_nm_to_hz, PhaseMatching,
    PumpShape, SPEED_OF_LIGHT_M_S,
};
pub use supermode::SupermodeBasis;
