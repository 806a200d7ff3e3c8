use std::path::Path;

use serde_json::{json, Map};

use qcomb::io;

use crate::commands::{load_config, out_dir};
use crate::CliError;

pub fn run(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let loaded = load_config(config_path)?;
    let params = loaded
        .config
        .model_params()
        .map_err(|e| CliError::config(config_path, e))?;
    let model = params.build()?;
    let dir = out_dir(Some(&loaded.config), out)?;

    io::write_supermodes(&dir.join("supermodes.csv"), &model.basis)?;
    let values: Vec<f64> = model.basis.values().iter().copied().collect();
    io::write_eigenvalues(&dir.join("eigenvalues.json"), &values)?;
    io::write_band_powers(&dir.join("band_powers.json"), model.bands.powers())?;

    let mut meta = Map::new();
    meta.insert("config_sha256".into(), json!(loaded.sha256));
    meta.insert("pump_ratio".into(), json!(loaded.config.pump_ratio));
    meta.insert("efficiency".into(), json!(loaded.config.efficiency));
    meta.insert("n_bands".into(), json!(model.bands.len()));
    meta.insert("gap_loss".into(), json!(model.bands.gap_loss()));
    io::write_state(&dir.join("state.json"), &model.state, meta)?;

    println!(
        "{} lines, {} supermodes, {} bands (gap loss {:.3}); wrote supermodes.csv, \
         eigenvalues.json, band_powers.json, state.json to {}",
        model.grid.len(),
        model.basis.len(),
        model.bands.len(),
        model.bands.gap_loss(),
        dir.display()
    );
    Ok(())
}
