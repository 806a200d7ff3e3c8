use qcomb::io;
use qcomb::pipeline::extract_modes;
use qcomb::state::Quadrature;

use crate::commands::{load_bundle, out_dir, require_physical};
use crate::{AnalysisArgs, CliError};

pub fn run(args: &AnalysisArgs) -> Result<(), CliError> {
    let (mut loaded, bundle) =
        load_bundle(&args.bundle.config, &args.bundle.traces, &args.bundle.powers)?;
    if let Some(seed) = args.seed {
        loaded.config.seed = seed;
    }
    if let Some(samples) = args.mc_samples {
        loaded.config.mc_samples = samples;
    }
    let stats = bundle.extract_all(&loaded.config.extrema_options())?;
    let (state, warnings) = stats.assemble_covariance()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    require_physical(&state)?;
    let set = extract_modes(
        &stats,
        &loaded.config.mc_options(),
        &loaded.config.extract_options(),
    )?;
    let dir = out_dir(Some(&loaded.config), args.bundle.out.as_deref())?;
    io::write_extraction(&dir.join("extraction.json"), &set)?;
    for (k, m) in set.modes.iter().enumerate() {
        let q = match m.squeezed_quadrature {
            Quadrature::X => "x",
            Quadrature::P => "p",
        };
        println!(
            "mode {k}: {q}  {:.3} +/- {:.3}  (anti {:.3} +/- {:.3}){}",
            m.squeezed_mean,
            m.squeezed_std,
            m.anti_mean,
            m.anti_std,
            if m.nonclassical { "  nonclassical" } else { "" }
        );
    }
    println!(
        "{} of {} modes nonclassical; wrote extraction.json to {}",
        set.nonclassical_count,
        set.modes.len(),
        dir.display()
    );
    Ok(())
}
