pub mod ingest;
pub mod modes;
pub mod report;
pub mod simulate;
pub mod witness;

use std::fs;
use std::path::{Path, PathBuf};

use qcomb::pipeline::TraceBundle;
use qcomb::{io, CovarianceState};

use crate::config::{self, LoadedConfig, RunConfig};
use crate::CliError;

pub(crate) fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    config::load(path).map_err(|e| CliError::config(path, e))
}

/// `--out` wins over the config's `out_dir`; `out` is the fallback.
pub(crate) fn out_dir(cfg: Option<&RunConfig>, flag: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| cfg.and_then(|c| c.out_dir.as_ref().map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::new(3, format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub(crate) fn load_bundle(
    config_path: &Path,
    traces: &Path,
    powers: &Path,
) -> Result<(LoadedConfig, TraceBundle<f64>), CliError> {
    let loaded = load_config(config_path)?;
    let band_powers = io::read_band_powers(powers)?;
    let bundle = io::read_traces(traces, band_powers)?;
    Ok((loaded, bundle))
}

/// Grossly unphysical states are refused; mild excursions below nu = 1
/// (routine for reconstructed data) pass through and stay visible in the
/// assembly warnings.
pub(crate) fn require_physical(state: &CovarianceState) -> Result<(), CliError> {
    let nu = state.min_symplectic();
    if !(nu >= 0.8) {
        return Err(CliError::new(
            4,
            format!("state refused: min symplectic eigenvalue {nu:.4} is below 0.8"),
        ));
    }
    Ok(())
}
