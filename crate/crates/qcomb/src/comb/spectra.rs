use crate::comb::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DVector;

pub const SPEED_OF_LIGHT_M_S: f64 = 2.99792458e8;

/// Gaussian width bookkeeping. Field amplitudes are what the mode algebra
/// uses; lab datasheets quote intensity FWHM, which is narrower by
/// 2*sqrt(ln 2) relative to the amplitude standard deviation.
pub fn amplitude_std_from_intensity_fwhm_nm<T: Scalar>(fwhm_nm: T, wavelength_nm: T) -> Result<T> {
    if !(fwhm_nm > T::zero()) || !(wavelength_nm > T::zero()) {
        return Err(Error::Model("spectral widths must be positive".into()));
    }
    let c = T::from_f64_lit(SPEED_OF_LIGHT_M_S);
    let nm = T::from_f64_lit(1.0e-9);
    let lambda = wavelength_nm * nm;
    // intensity FWHM in Hz at fixed fractional bandwidth
    let fwhm_hz = c * (fwhm_nm * nm) / (lambda * lambda);
    let two = T::from_f64_lit(2.0);
    let intensity_std = fwhm_hz / (two * (two * T::ln_2()).sqrt());
    Ok(two.sqrt() * intensity_std)
}

pub fn wavelength_nm_to_hz<T: Scalar>(wavelength_nm: T) -> T {
    T::from_f64_lit(SPEED_OF_LIGHT_M_S) / (wavelength_nm * T::from_f64_lit(1.0e-9))
}

/// Pump amplitude as a function of two-photon sum detuning.
#[derive(Clone, Debug, PartialEq)]
pub enum PumpShape<T> {
    /// Monochromatic pump at twice the carrier: only counter-detuned line
    /// pairs couple.
    SingleLine,
    /// Gaussian amplitude profile with the given standard deviation.
    Gaussian { std_hz: T },
}

impl<T: Scalar> PumpShape<T> {
    pub fn gaussian(std_hz: T) -> Result<Self> {
        if !(std_hz > T::zero()) {
            return Err(Error::Model("pump width must be positive".into()));
        }
        Ok(Self::Gaussian { std_hz })
    }

    /// Amplitude at sum detuning `s`; the single-line case is handled by
    /// the kernel builder through its sparsity, not through this value.
    pub fn amplitude(&self, s: T) -> T {
        match self {
            Self::SingleLine => {
                if s == T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Gaussian { std_hz } => {
                let two = T::from_f64_lit(2.0);
                (-s * s / (two * *std_hz * *std_hz)).exp()
            }
        }
    }
}

/// Phase-matching acceptance as a function of difference detuning.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseMatching<T> {
    /// Unit acceptance inside a half-width, zero outside.
    Flat { halfwidth_hz: T },
    /// Gaussian acceptance with the given standard deviation.
    Gaussian { std_hz: T },
}

impl<T: Scalar> PhaseMatching<T> {
    pub fn flat(halfwidth_hz: T) -> Result<Self> {
        if !(halfwidth_hz > T::zero()) {
            return Err(Error::Model("phase-matching width must be positive".into()));
        }
        Ok(Self::Flat { halfwidth_hz })
    }

    pub fn gaussian(std_hz: T) -> Result<Self> {
        if !(std_hz > T::zero()) {
            return Err(Error::Model("phase-matching width must be positive".into()));
        }
        Ok(Self::Gaussian { std_hz })
    }

    pub fn factor(&self, d: T) -> T {
        match self {
            Self::Flat { halfwidth_hz } => {
                if d.abs() <= *halfwidth_hz {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Gaussian { std_hz } => {
                let two = T::from_f64_lit(2.0);
                (-d * d / (two * *std_hz * *std_hz)).exp()
            }
        }
    }
}

/// Unit-norm Gaussian local-oscillator amplitude sampled on the grid.
pub fn lo_amplitude<T: Scalar>(grid: &FrequencyGrid<T>, std_hz: T) -> Result<DVector<T>> {
    if !(std_hz > T::zero()) {
        return Err(Error::Model("local-oscillator width must be positive".into()));
    }
    let two = T::from_f64_lit(2.0);
    let mut v = DVector::from_fn(grid.len(), |i, _| {
        let d = grid.detuning(i);
        (-d * d / (two * std_hz * std_hz)).exp()
    });
    let norm = v.norm();
    v /= norm;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn width_conversion_reference_values() {
        // 1.0607 nm intensity FWHM at 397.5 nm
        let a: f64 = amplitude_std_from_intensity_fwhm_nm(1.0607, 397.5).unwrap();
        assert_relative_eq!(a, 1.2086380977e12, max_relative = 1e-9);
        // 6 nm intensity FWHM at 795 nm
        let alo: f64 = amplitude_std_from_intensity_fwhm_nm(6.0, 795.0).unwrap();
        assert_relative_eq!(alo, 1.7092082083254805e12, max_relative = 1e-9);
        // the LO width sits at the fundamental mode scale sqrt(2) * pump std,
        // but only to a few parts in 1e5: 6 nm is a rounded setting
        assert_relative_eq!(alo, 2.0_f64.sqrt() * a, max_relative = 1e-4);
    }

    #[test]
    fn lo_vector_is_unit_norm_and_symmetric() {
        let g = FrequencyGrid::<f64>::new(3.77e14, 1.0e11, 201).unwrap();
        let lo = lo_amplitude(&g, 1.7092723898e12).unwrap();
        assert_relative_eq!(lo.norm(), 1.0, max_relative = 1e-14);
        for i in 0..g.len() {
            assert_relative_eq!(lo[i], lo[g.mirror(i)], max_relative = 1e-14);
        }
        assert!(lo[g.center_index()] > lo[0]);
    }

    #[test]
    fn flat_acceptance_is_a_window() {
        let pm = PhaseMatching::flat(5.0).unwrap();
        assert_eq!(pm.factor(4.9), 1.0);
        assert_eq!(pm.factor(-5.0), 1.0);
        assert_eq!(pm.factor(5.1), 0.0);
    }
}
