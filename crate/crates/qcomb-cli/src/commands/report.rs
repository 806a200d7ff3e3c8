use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use qcomb::nalgebra::DMatrix;
use serde::Serialize;

use qcomb::pipeline::{extract_modes, ModeSet};
use qcomb::state::Quadrature;
use qcomb::{io, witness, CovarianceState, Error};

use crate::commands::{load_bundle, out_dir, require_physical};
use crate::{AnalysisArgs, CliError};

/// Everything a run produced, in one stable document. No timestamps: the
/// same config and seed give byte-identical output.
#[derive(Serialize)]
struct Report {
    provenance: Provenance,
    witnesses: WitnessBlock,
    squeezing_spectrum: Vec<ModeRow>,
    nonclassical_count: usize,
    purity: PurityBlock,
    commutator_max: f64,
}

#[derive(Serialize)]
struct Provenance {
    config_sha256: String,
    seed: u64,
    mc_samples: usize,
    n_bands: usize,
    band_powers: Vec<f64>,
    state_nu_min: f64,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct WitnessBlock {
    bipartitions: usize,
    ppt_entangled: usize,
    epr_entangled: usize,
    duan_entangled: usize,
    nu_min_best: f64,
    nu_min_worst: f64,
}

#[derive(Serialize)]
struct ModeRow {
    mode: usize,
    quadrature: Quadrature,
    squeezed_mean: f64,
    squeezed_sigma: f64,
    anti_mean: f64,
    anti_sigma: f64,
    nonclassical: bool,
}

/// `uncorrected` is the state as measured; `corrected` divides the
/// detection efficiency back out of every variance.
#[derive(Serialize)]
struct PurityBlock {
    uncorrected: f64,
    corrected: f64,
    efficiency: f64,
}

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
    require_physical(&state)?;

    let entries = witness::scan(&state)?;
    let summary = witness::summarize(&entries);
    let set = extract_modes(
        &stats,
        &loaded.config.mc_options(),
        &loaded.config.extract_options(),
    )?;

    let eta = loaded.config.efficiency;
    let corrected = undo_loss(&state, eta)?;

    let dir = out_dir(Some(&loaded.config), args.bundle.out.as_deref())?;
    io::write_state(&dir.join("measured_state.json"), &state, Default::default())?;
    io::write_scan_json(&dir.join("scan.json"), &entries)?;
    io::write_scan_csv(&dir.join("scan.csv"), &entries)?;
    io::write_witness_summary(&dir.join("witness_summary.json"), &summary)?;
    io::write_extraction(&dir.join("extraction.json"), &set)?;
    write_correlation(&dir.join("correlation_x.csv"), state.cx())?;
    write_correlation(&dir.join("correlation_p.csv"), state.cp())?;
    write_spectrum(&dir.join("spectrum.csv"), &set)?;

    let report = Report {
        provenance: Provenance {
            config_sha256: loaded.sha256,
            seed: loaded.config.seed,
            mc_samples: loaded.config.mc_samples,
            n_bands: state.n(),
            band_powers: bundle.band_powers.clone(),
            state_nu_min: state.min_symplectic(),
            warnings,
        },
        witnesses: WitnessBlock {
            bipartitions: summary.bipartitions,
            ppt_entangled: summary.ppt_entangled,
            epr_entangled: summary.epr_entangled,
            duan_entangled: summary.duan_entangled,
            nu_min_best: entries
                .iter()
                .map(|e| e.nu_min)
                .fold(f64::INFINITY, f64::min),
            nu_min_worst: entries
                .iter()
                .map(|e| e.nu_min)
                .fold(f64::NEG_INFINITY, f64::max),
        },
        squeezing_spectrum: set
            .modes
            .iter()
            .enumerate()
            .map(|(k, m)| ModeRow {
                mode: k,
                quadrature: m.squeezed_quadrature,
                squeezed_mean: m.squeezed_mean,
                squeezed_sigma: m.squeezed_std,
                anti_mean: m.anti_mean,
                anti_sigma: m.anti_std,
                nonclassical: m.nonclassical,
            })
            .collect(),
        nonclassical_count: set.nonclassical_count,
        purity: PurityBlock {
            uncorrected: state.purity(),
            corrected: corrected.purity(),
            efficiency: eta,
        },
        commutator_max: state.commutator_max(),
    };
    io::write_json(&dir.join("report.json"), &report)?;

    println!(
        "report: {} bipartitions ({} ppt-entangled), {} nonclassical modes, \
         purity {:.3} uncorrected / {:.3} corrected; wrote report.json and plot data to {}",
        report.witnesses.bipartitions,
        report.witnesses.ppt_entangled,
        report.nonclassical_count,
        report.purity.uncorrected,
        report.purity.corrected,
        dir.display()
    );
    Ok(())
}

/// Inverts uniform detection loss: C -> (C - (1 - eta) I) / eta.
fn undo_loss(state: &CovarianceState, eta: f64) -> Result<CovarianceState, CliError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(CliError::new(2, format!("efficiency {eta} outside (0, 1]")));
    }
    let n = state.n();
    let peel = |c: &DMatrix<f64>| {
        let mut m = c.clone();
        for i in 0..n {
            m[(i, i)] -= 1.0 - eta;
        }
        m / eta
    };
    CovarianceState::new(peel(state.cx()), peel(state.cp())).map_err(|e| match e {
        Error::NotPositiveDefinite(_) => CliError::new(
            4,
            format!("loss correction at efficiency {eta} drives a variance below zero"),
        ),
        other => CliError::from_lib(other),
    })
}

/// Pearson-normalized covariance block as a headerless numeric CSV.
fn write_correlation(path: &Path, c: &DMatrix<f64>) -> Result<(), CliError> {
    let n = c.nrows();
    let mut w = csv::Writer::from_writer(BufWriter::new(
        File::create(path).map_err(qcomb::Error::from)?,
    ));
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| format!("{}", c[(i, j)] / (c[(i, i)] * c[(j, j)]).sqrt()))
            .collect();
        w.write_record(&row).map_err(qcomb::Error::from)?;
    }
    w.flush().map_err(qcomb::Error::from)?;
    Ok(())
}

/// Per-mode squeezing table, linear variances plus dB of the means.
fn write_spectrum(path: &Path, set: &ModeSet<f64>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(
        File::create(path).map_err(qcomb::Error::from)?,
    ));
    w.write_record([
        "mode",
        "quadrature",
        "squeezed_mean",
        "squeezed_sigma",
        "anti_mean",
        "anti_sigma",
        "squeezed_db",
        "anti_db",
        "nonclassical",
    ])
    .map_err(qcomb::Error::from)?;
    for (k, m) in set.modes.iter().enumerate() {
        let q = match m.squeezed_quadrature {
            Quadrature::X => "x",
            Quadrature::P => "p",
        };
        w.write_record([
            format!("{k}"),
            q.to_string(),
            format!("{}", m.squeezed_mean),
            format!("{}", m.squeezed_std),
            format!("{}", m.anti_mean),
            format!("{}", m.anti_std),
            format!("{}", 10.0 * m.squeezed_mean.log10()),
            format!("{}", 10.0 * m.anti_mean.log10()),
            format!("{}", m.nonclassical),
        ])
        .map_err(qcomb::Error::from)?;
    }
    w.flush().map_err(qcomb::Error::from)?;
    Ok(())
}
