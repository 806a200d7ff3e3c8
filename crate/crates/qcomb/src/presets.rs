//! Ready-made model configurations and the builder that turns parameters
//! into a solved model.

use crate::comb::coupling::CouplingKernel;
use crate::comb::grid::FrequencyGrid;
use crate::comb::spectra::{
    amplitude_std_from_intensity_fwhm_nm, lo_amplitude, wavelength_nm_to_hz, PhaseMatching,
    PumpShape,
};
use crate::comb::supermode::SupermodeBasis;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::state::bands::BandPartition;
use crate::state::covariance::CovarianceState;
use crate::state::squeezing::{calibrate, SqueezingSpectrum};
use nalgebra::DVector;

#[derive(Clone, Debug)]
pub enum PumpParams<T> {
    /// Monochromatic pump at twice the comb center frequency.
    SingleLine,
    /// Gaussian pump spectrum given by its intensity FWHM at the pump
    /// wavelength (half the comb center wavelength).
    GaussianFwhm { fwhm_nm: T },
}

/// Complete parameter set for one simulation run.
#[derive(Clone, Debug)]
pub struct ModelParams<T> {
    pub center_wavelength_nm: T,
    pub fsr_hz: T,
    pub n_lines: usize,
    pub pump: PumpParams<T>,
    pub phase_matching: PhaseMatching<T>,
    /// Intensity FWHM of the local oscillator at the comb center wavelength.
    pub lo_fwhm_nm: T,
    pub n_bands: usize,
    pub gap_fraction: T,
    /// Pump amplitude relative to threshold, < 1.
    pub pump_ratio: T,
    /// Detection efficiency applied to every mode variance.
    pub efficiency: T,
    /// Supermodes kept from the kernel diagonalization.
    pub k_modes: usize,
}

/// A solved model: kernel, supermodes, band partition, and the band-space
/// covariance state with detection loss applied.
#[derive(Clone, Debug)]
pub struct Model<T> {
    pub params: ModelParams<T>,
    pub grid: FrequencyGrid<T>,
    pub kernel: CouplingKernel<T>,
    pub basis: SupermodeBasis<T>,
    pub lo: DVector<T>,
    pub bands: BandPartition<T>,
    pub spectrum: SqueezingSpectrum<T>,
    pub state: CovarianceState<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn build(&self) -> Result<Model<T>> {
        let grid = FrequencyGrid::new(
            wavelength_nm_to_hz(self.center_wavelength_nm),
            self.fsr_hz,
            self.n_lines,
        )?;
        let pump = match &self.pump {
            PumpParams::SingleLine => PumpShape::SingleLine,
            PumpParams::GaussianFwhm { fwhm_nm } => {
                let two = T::from_f64_lit(2.0);
                PumpShape::gaussian(amplitude_std_from_intensity_fwhm_nm(
                    *fwhm_nm,
                    self.center_wavelength_nm / two,
                )?)?
            }
        };
        let kernel = CouplingKernel::build(grid.clone(), pump, self.phase_matching.clone())?;
        let basis = SupermodeBasis::solve(&kernel, self.k_modes)?;
        let lo = lo_amplitude(
            &grid,
            amplitude_std_from_intensity_fwhm_nm(self.lo_fwhm_nm, self.center_wavelength_nm)?,
        )?;
        let bands = BandPartition::equal_energy(&lo, self.n_bands, self.gap_fraction)?;
        let spectrum =
            SqueezingSpectrum::from_eigenvalues(basis.values(), self.pump_ratio, self.efficiency)?;
        let state = spectrum.band_state(&bands.projections(&basis))?;
        Ok(Model {
            params: self.clone(),
            grid,
            kernel,
            basis,
            lo,
            bands,
            spectrum,
            state,
        })
    }
}

impl<T: Scalar> Model<T> {
    /// Hermite-Gauss scale sqrt(s f / 2) of the analytic eigenmodes, defined
    /// when pump and phase matching are both Gaussian.
    pub fn hermite_scale(&self) -> Option<T> {
        match (self.kernel.pump(), self.kernel.phase_matching()) {
            (PumpShape::Gaussian { std_hz: s }, PhaseMatching::Gaussian { std_hz: f }) => {
                Some((*s * *f / T::from_f64_lit(2.0)).sqrt())
            }
            _ => None,
        }
    }
}

/// Pump amplitude std for the reference pump (1.0607 nm intensity FWHM at
/// 397.5 nm).
fn reference_pump_std<T: Scalar>() -> T {
    amplitude_std_from_intensity_fwhm_nm(T::from_f64_lit(1.0607), T::from_f64_lit(397.5))
        .expect("positive reference widths")
}

/// The measured-geometry model: 201 comb lines on a 100 GHz grid around
/// 795 nm, Gaussian pump against a 4x wider Gaussian acceptance, a 6 nm
/// local oscillator cut into 10 equal-energy bands, and pump strength and
/// detection efficiency calibrated to a -5.9 dB / +7.8 dB leading-mode
/// variance pair.
pub fn reference_model<T: Scalar>() -> ModelParams<T> {
    let (pump_ratio, efficiency) =
        calibrate(T::from_f64_lit(-5.9), T::from_f64_lit(7.8)).expect("reference pair is valid");
    ModelParams {
        center_wavelength_nm: T::from_f64_lit(795.0),
        fsr_hz: T::from_f64_lit(1.0e11),
        n_lines: 201,
        pump: PumpParams::GaussianFwhm {
            fwhm_nm: T::from_f64_lit(1.0607),
        },
        phase_matching: PhaseMatching::gaussian(T::from_f64_lit(4.0) * reference_pump_std())
            .expect("positive width"),
        lo_fwhm_nm: T::from_f64_lit(6.0),
        n_bands: 10,
        gap_fraction: T::from_f64_lit(0.05),
        pump_ratio,
        efficiency,
        k_modes: 10,
    }
}

/// Same geometry driven by a monochromatic pump; the kernel couples comb
/// line pairs independently and every supermode is an exact parity doublet.
/// Keeps the full doublet spectrum: coupling decays only with the
/// phase-matching envelope, so truncation would silently decouple the
/// outer mirror pairs.
pub fn single_line_model<T: Scalar>() -> ModelParams<T> {
    ModelParams {
        pump: PumpParams::SingleLine,
        k_modes: 201,
        ..reference_model()
    }
}
