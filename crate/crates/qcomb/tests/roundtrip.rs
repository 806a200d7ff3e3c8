//! Full-pipeline round trips on the reference model: band state ->
//! synthesized scans -> traces file -> extremum statistics -> reassembled
//! covariance.

use approx::assert_relative_eq;
use qcomb::io;
use qcomb::pipeline::{synthesize, ExtremaOptions, Jitter, SynthOptions};
use qcomb::presets;

fn max_block_error(a: &qcomb::CovarianceState, b: &qcomb::CovarianceState) -> f64 {
    let dx = (a.cx() - b.cx()).abs().max();
    let dp = (a.cp() - b.cp()).abs().max();
    dx.max(dp)
}

/// The two edge bands sit close to shot noise in both quadratures
/// (0.18 dB of x/p contrast), so extraction needs the low prominence
/// threshold the reference config ships with.
fn reference_extrema() -> ExtremaOptions<f64> {
    ExtremaOptions {
        prominence_db: 0.05,
        ..ExtremaOptions::default()
    }
}

#[test]
fn noise_free_scan_recovers_the_band_state_through_the_file_layer() {
    let model = presets::reference_model().build().unwrap();
    let bundle = synthesize(&model.state, &model.bands, &SynthOptions::default()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.csv");
    io::write_traces(&path, &bundle).unwrap();
    let reread = io::read_traces(&path, bundle.band_powers.clone()).unwrap();

    let stats = reread.extract_all(&reference_extrema()).unwrap();
    let (rebuilt, warnings) = stats.assemble_covariance().unwrap();
    assert!(warnings.is_empty(), "{warnings:?}");
    let err = max_block_error(&rebuilt, &model.state);
    assert!(err <= 1e-6, "round-trip error {err}");
    assert_relative_eq!(
        rebuilt.min_symplectic(),
        model.state.min_symplectic(),
        epsilon = 1e-6
    );
}

#[test]
fn jittered_scan_still_assembles_to_the_state_with_honest_uncertainties() {
    let model = presets::reference_model().build().unwrap();
    let n = model.bands.len();
    let opts = SynthOptions {
        jitter: Jitter::uniform(n, 0.015, 11),
        ..SynthOptions::default()
    };
    let bundle = synthesize(&model.state, &model.bands, &opts).unwrap();
    let stats = bundle.extract_all(&reference_extrema()).unwrap();

    // jitter draws are moment-matched, so pooled levels carry the requested
    // spread while their means stay on the noise-free values
    for s in stats.stats.values() {
        assert_relative_eq!(s.x_std_db, 0.015, epsilon = 1e-9);
        assert_relative_eq!(s.p_std_db, 0.015, epsilon = 1e-9);
    }
    let (rebuilt, warnings) = stats.assemble_covariance().unwrap();
    assert!(warnings.is_empty(), "{warnings:?}");
    let err = max_block_error(&rebuilt, &model.state);
    assert!(err <= 1e-6, "jittered round-trip error {err}");
}
