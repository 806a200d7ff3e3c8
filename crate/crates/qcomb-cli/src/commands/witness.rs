use std::path::Path;

use qcomb::{io, witness};

use crate::commands::{out_dir, require_physical};
use crate::CliError;

pub fn run(state_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (state, _) = io::read_state(state_path)?;
    require_physical(&state)?;
    let entries = witness::scan(&state)?;
    let summary = witness::summarize(&entries);
    let dir = out_dir(None, out)?;
    io::write_scan_json(&dir.join("scan.json"), &entries)?;
    io::write_scan_csv(&dir.join("scan.csv"), &entries)?;
    io::write_witness_summary(&dir.join("witness_summary.json"), &summary)?;
    println!(
        "{} bipartitions: {} ppt-entangled, {} epr-entangled, {} duan-entangled; \
         wrote scan.json, scan.csv, witness_summary.json to {}",
        summary.bipartitions,
        summary.ppt_entangled,
        summary.epr_entangled,
        summary.duan_entangled,
        dir.display()
    );
    Ok(())
}
