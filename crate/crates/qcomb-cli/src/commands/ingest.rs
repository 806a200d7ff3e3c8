use std::path::Path;

use serde_json::{json, Map};

use qcomb::io;

use crate::commands::{load_bundle, out_dir};
use crate::CliError;

pub fn run(
    config_path: &Path,
    traces: &Path,
    powers: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (loaded, bundle) = load_bundle(config_path, traces, powers)?;
    let stats = bundle.extract_all(&loaded.config.extrema_options())?;
    let (state, warnings) = stats.assemble_covariance()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let dir = out_dir(Some(&loaded.config), out)?;
    let mut meta = Map::new();
    meta.insert("config_sha256".into(), json!(loaded.sha256));
    meta.insert("efficiency".into(), json!(loaded.config.efficiency));
    io::write_state(&dir.join("measured_state.json"), &state, meta)?;
    println!(
        "assembled {} bands from {} traces (nu_min {:.4}); wrote measured_state.json to {}",
        state.n(),
        bundle.traces.len(),
        state.min_symplectic(),
        dir.display()
    );
    Ok(())
}
