use std::fs;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use qcomb::pipeline::{ExtractOptions, ExtremaOptions, McOptions};
use qcomb::presets::{ModelParams, PumpParams};
use qcomb::{PhaseMatching, Result};

/// One run, fully described. Unknown keys are rejected so a typo cannot
/// silently fall back to a default.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub center_wavelength_nm: f64,
    pub fsr_hz: f64,
    #[serde(default = "defaults::n_modes")]
    pub n_modes: usize,
    pub pump: PumpConfig,
    pub phase_matching: PmConfig,
    pub lo: LoConfig,
    pub bands: BandsConfig,
    /// Pump amplitude relative to threshold, < 1.
    pub pump_ratio: f64,
    #[serde(default = "defaults::efficiency")]
    pub efficiency: f64,
    #[serde(default = "defaults::k_modes")]
    pub k_modes: usize,
    #[serde(default = "defaults::mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default)]
    pub extraction: ExtractionConfig,
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PumpConfig {
    /// Monochromatic pump at twice the comb center frequency.
    SingleLine,
    /// Intensity FWHM in nm, stated at the pump wavelength.
    Gaussian { fwhm_nm: f64 },
}

/// Crystal acceptance over the signal-frequency difference. `width` is in
/// Hz of amplitude: the half-width of the flat window, or the gaussian
/// standard deviation.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PmConfig {
    Flat { width: f64 },
    Gaussian { width: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoConfig {
    /// Intensity FWHM in nm at the comb center wavelength.
    pub fwhm_nm: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    pub count: usize,
    #[serde(default = "defaults::gap_fraction")]
    pub gap_fraction: f64,
}

/// Knobs of the trace-to-variance extraction step.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionConfig {
    #[serde(default = "defaults::smooth_fraction")]
    pub smooth_fraction: f64,
    #[serde(default = "defaults::prominence_db")]
    pub prominence_db: f64,
    #[serde(default = "defaults::phase_tol_deg")]
    pub phase_tol_deg: f64,
    #[serde(default = "defaults::drop_tol")]
    pub drop_tol: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            smooth_fraction: defaults::smooth_fraction(),
            prominence_db: defaults::prominence_db(),
            phase_tol_deg: defaults::phase_tol_deg(),
            drop_tol: defaults::drop_tol(),
        }
    }
}

mod defaults {
    pub fn n_modes() -> usize {
        201
    }
    pub fn efficiency() -> f64 {
        1.0
    }
    pub fn k_modes() -> usize {
        10
    }
    pub fn mc_samples() -> usize {
        10_000
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn gap_fraction() -> f64 {
        0.05
    }
    pub fn smooth_fraction() -> f64 {
        0.01
    }
    pub fn prominence_db() -> f64 {
        0.5
    }
    pub fn phase_tol_deg() -> f64 {
        10.0
    }
    pub fn drop_tol() -> f64 {
        0.2
    }
}

pub struct LoadedConfig {
    pub config: RunConfig,
    /// Hex digest of the raw config bytes, echoed into every output.
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let bytes = fs::read(path)?;
    let config: RunConfig = serde_json::from_slice(&bytes)?;
    let digest = Sha256::digest(&bytes);
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig { config, sha256 })
}

impl RunConfig {
    pub fn model_params(&self) -> Result<ModelParams<f64>> {
        let pump = match &self.pump {
            PumpConfig::SingleLine => PumpParams::SingleLine,
            PumpConfig::Gaussian { fwhm_nm } => PumpParams::GaussianFwhm { fwhm_nm: *fwhm_nm },
        };
        let phase_matching = match &self.phase_matching {
            PmConfig::Flat { width } => PhaseMatching::flat(*width)?,
            PmConfig::Gaussian { width } => PhaseMatching::gaussian(*width)?,
        };
        Ok(ModelParams {
            center_wavelength_nm: self.center_wavelength_nm,
            fsr_hz: self.fsr_hz,
            n_lines: self.n_modes,
            pump,
            phase_matching,
            lo_fwhm_nm: self.lo.fwhm_nm,
            n_bands: self.bands.count,
            gap_fraction: self.bands.gap_fraction,
            pump_ratio: self.pump_ratio,
            efficiency: self.efficiency,
            k_modes: self.k_modes,
        })
    }

    pub fn extrema_options(&self) -> ExtremaOptions<f64> {
        ExtremaOptions {
            smooth_fraction: self.extraction.smooth_fraction,
            prominence_db: self.extraction.prominence_db,
            phase_tol_deg: self.extraction.phase_tol_deg,
        }
    }

    pub fn mc_options(&self) -> McOptions {
        McOptions {
            samples: self.mc_samples,
            seed: self.seed,
        }
    }

    pub fn extract_options(&self) -> ExtractOptions<f64> {
        ExtractOptions {
            k_modes: self.k_modes,
            drop_tol: self.extraction.drop_tol,
        }
    }
}
