//! File formats for pipeline artifacts. Writers are deterministic: the
//! same data produces byte-identical files.
//!
//! * `supermodes.csv`: one comb line per row, `frequency_hz` then one
//!   column per kept mode.
//! * `eigenvalues.json`: bare array of signed kernel eigenvalues.
//! * `state.json`: covariance blocks as nested row-major arrays plus a
//!   free-form `meta` object.
//! * `traces.csv`: long format, one sample per row:
//!   `shape_id,band_i,band_j,phase,power_db`; `shape_id` is the
//!   lexicographic rank of (band_i, band_j).
//! * `band_powers.json`: `{"band_powers": [...]}`.
//! * `scan.csv` / `scan.json`: one row per bipartition with all three
//!   witnesses; `witness_summary.json` holds the counts.
//! * `extraction.json`: extracted mode vectors with squeezed-side
//!   statistics and the nonclassical count.

use crate::comb::supermode::SupermodeBasis;
use crate::error::{Error, Result};
use crate::pipeline::bundle::TraceBundle;
use crate::pipeline::modes::ModeSet;
use crate::pipeline::trace::Trace;
use crate::state::covariance::CovarianceState;
use crate::state::squeezing::Quadrature;
use crate::witness::{ScanEntry, ScanSummary};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

/// Pretty JSON plus a trailing newline; the layout is stable, so equal data
/// means equal bytes.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_supermodes(path: &Path, basis: &SupermodeBasis<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["frequency_hz".to_string()];
    for k in 0..basis.len() {
        header.push(format!("mode_{k}"));
    }
    w.write_record(&header)?;
    let grid = basis.grid();
    for i in 0..grid.len() {
        let mut row = vec![format!("{}", grid.frequency(i))];
        for k in 0..basis.len() {
            row.push(format!("{}", basis.vectors()[(i, k)]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_eigenvalues(path: &Path, values: &[f64]) -> Result<()> {
    write_json(path, &values)
}

pub fn read_eigenvalues(path: &Path) -> Result<Vec<f64>> {
    read_json(path)
}

/// `state.json` payload: dense covariance blocks plus caller-defined
/// metadata (efficiency, configuration digest, ...).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub n: usize,
    pub cx: Vec<Vec<f64>>,
    pub cp: Vec<Vec<f64>>,
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn write_state(
    path: &Path,
    state: &CovarianceState<f64>,
    meta: serde_json::Map<String, serde_json::Value>,
) -> Result<()> {
    write_json(
        path,
        &StateJson {
            n: state.n(),
            cx: matrix_rows(state.cx()),
            cp: matrix_rows(state.cp()),
            meta,
        },
    )
}

pub fn read_state(path: &Path) -> Result<(CovarianceState<f64>, StateJson)> {
    let raw: StateJson = read_json(path)?;
    let build = |rows: &Vec<Vec<f64>>, label: &str| -> Result<DMatrix<f64>> {
        if rows.len() != raw.n || rows.iter().any(|r| r.len() != raw.n) {
            return Err(Error::Data(format!(
                "{label} block of {path:?} is not {n} x {n}",
                n = raw.n
            )));
        }
        Ok(DMatrix::from_fn(raw.n, raw.n, |i, j| rows[i][j]))
    };
    let cx = build(&raw.cx, "cx")?;
    let cp = build(&raw.cp, "cp")?;
    Ok((CovarianceState::new(cx, cp)?, raw))
}

fn shape_rank(n: usize, i: usize, j: usize) -> usize {
    i * (2 * n - i + 1) / 2 + (j - i)
}

pub fn write_traces(path: &Path, bundle: &TraceBundle<f64>) -> Result<()> {
    let n = bundle.n_bands();
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["shape_id", "band_i", "band_j", "phase", "power_db"])?;
    for t in &bundle.traces {
        let id = shape_rank(n, t.band_i, t.band_j);
        for (phase, power) in t.phase.iter().zip(&t.power_db) {
            w.write_record([
                format!("{id}"),
                format!("{}", t.band_i),
                format!("{}", t.band_j),
                format!("{phase}"),
                format!("{power}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a long-format trace table. Rows of one scan must be contiguous and
/// share a `shape_id`; band powers live in their own file.
pub fn read_traces(path: &Path, band_powers: Vec<f64>) -> Result<TraceBundle<f64>> {
    #[derive(Deserialize)]
    struct Row {
        shape_id: u64,
        band_i: usize,
        band_j: usize,
        phase: f64,
        power_db: f64,
    }
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut traces: Vec<Trace<f64>> = Vec::new();
    let mut current: Option<u64> = None;
    let mut seen: Vec<u64> = Vec::new();
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Data(format!("{path:?} row {}: {e}", line + 2)))?;
        if current != Some(row.shape_id) {
            if seen.contains(&row.shape_id) {
                return Err(Error::Data(format!(
                    "{path:?}: rows of shape_id {} are not contiguous",
                    row.shape_id
                )));
            }
            seen.push(row.shape_id);
            current = Some(row.shape_id);
            traces.push(Trace {
                band_i: row.band_i,
                band_j: row.band_j,
                phase: Vec::new(),
                power_db: Vec::new(),
            });
        }
        let t = traces.last_mut().expect("pushed above");
        if (t.band_i, t.band_j) != (row.band_i, row.band_j) {
            return Err(Error::Data(format!(
                "{path:?} row {}: shape_id {} switches bands ({}, {}) -> ({}, {})",
                line + 2,
                row.shape_id,
                t.band_i,
                t.band_j,
                row.band_i,
                row.band_j
            )));
        }
        t.phase.push(row.phase);
        t.power_db.push(row.power_db);
    }
    if traces.is_empty() {
        return Err(Error::Data(format!("{path:?} holds no trace rows")));
    }
    Ok(TraceBundle {
        traces,
        band_powers,
    })
}

#[derive(Serialize, Deserialize)]
struct BandPowersJson {
    band_powers: Vec<f64>,
}

pub fn write_band_powers(path: &Path, powers: &[f64]) -> Result<()> {
    write_json(
        path,
        &BandPowersJson {
            band_powers: powers.to_vec(),
        },
    )
}

pub fn read_band_powers(path: &Path) -> Result<Vec<f64>> {
    let raw: BandPowersJson = read_json(path)?;
    Ok(raw.band_powers)
}

/// One bipartition row of a witness scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanRecord {
    pub mask: u32,
    pub duan: f64,
    pub epr: f64,
    pub nu_min: f64,
}

impl From<&ScanEntry<f64>> for ScanRecord {
    fn from(e: &ScanEntry<f64>) -> Self {
        Self {
            mask: e.mask,
            duan: e.duan,
            epr: e.epr,
            nu_min: e.nu_min,
        }
    }
}

pub fn write_scan_json(path: &Path, entries: &[ScanEntry<f64>]) -> Result<()> {
    let records: Vec<ScanRecord> = entries.iter().map(ScanRecord::from).collect();
    write_json(path, &records)
}

pub fn read_scan_json(path: &Path) -> Result<Vec<ScanRecord>> {
    read_json(path)
}

pub fn write_scan_csv(path: &Path, entries: &[ScanEntry<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["mask", "duan", "epr", "nu_min"])?;
    for e in entries {
        w.write_record([
            format!("{}", e.mask),
            format!("{}", e.duan),
            format!("{}", e.epr),
            format!("{}", e.nu_min),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct WitnessSummaryJson {
    bipartitions: usize,
    ppt_entangled: usize,
    epr_entangled: usize,
    duan_entangled: usize,
}

pub fn write_witness_summary(path: &Path, summary: &ScanSummary) -> Result<()> {
    write_json(
        path,
        &WitnessSummaryJson {
            bipartitions: summary.bipartitions,
            ppt_entangled: summary.ppt_entangled,
            epr_entangled: summary.epr_entangled,
            duan_entangled: summary.duan_entangled,
        },
    )
}

/// Squeezed-side statistics of one extracted mode.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SqueezingEntry {
    pub mean: f64,
    pub sigma: f64,
    pub quadrature: Quadrature,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtractionJson {
    pub modes: Vec<Vec<f64>>,
    pub squeezing: Vec<SqueezingEntry>,
    pub nonclassical_count: usize,
}

impl From<&ModeSet<f64>> for ExtractionJson {
    fn from(set: &ModeSet<f64>) -> Self {
        Self {
            modes: set
                .modes
                .iter()
                .map(|m| m.vector.iter().copied().collect())
                .collect(),
            squeezing: set
                .modes
                .iter()
                .map(|m| SqueezingEntry {
                    mean: m.squeezed_mean,
                    sigma: m.squeezed_std,
                    quadrature: m.squeezed_quadrature,
                })
                .collect(),
            nonclassical_count: set.nonclassical_count,
        }
    }
}

pub fn write_extraction(path: &Path, set: &ModeSet<f64>) -> Result<()> {
    write_json(path, &ExtractionJson::from(set))
}

pub fn read_extraction(path: &Path) -> Result<ExtractionJson> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::synth::{synthesize, SynthOptions};
    use crate::state::bands::BandPartition;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn state_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let cx = DMatrix::from_row_slice(2, 2, &[3.6, -3.4, -3.4, 3.6]);
        let cp = DMatrix::from_row_slice(2, 2, &[2.7, 2.5, 2.5, 2.7]);
        let state = CovarianceState::new(cx, cp).unwrap();
        let mut meta = serde_json::Map::new();
        meta.insert("efficiency".into(), serde_json::json!(0.87));
        write_state(&path, &state, meta).unwrap();
        let (back, raw) = read_state(&path).unwrap();
        assert_eq!(back.cx(), state.cx());
        assert_eq!(back.cp(), state.cp());
        assert_relative_eq!(raw.meta["efficiency"].as_f64().unwrap(), 0.87);
    }

    #[test]
    fn traces_csv_round_trip_preserves_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.csv");
        let lo = DVector::from_element(20, (1.0 / 20.0_f64).sqrt());
        let bands = BandPartition::equal_energy(&lo, 2, 0.0).unwrap();
        let cx = DMatrix::from_row_slice(2, 2, &[3.6, -3.4, -3.4, 3.6]);
        let cp = DMatrix::from_row_slice(2, 2, &[2.7, 2.5, 2.5, 2.7]);
        let state = CovarianceState::new(cx, cp).unwrap();
        let bundle = synthesize(&state, &bands, &SynthOptions::default()).unwrap();
        write_traces(&path, &bundle).unwrap();
        let back = read_traces(&path, bundle.band_powers.clone()).unwrap();
        assert_eq!(back.traces.len(), bundle.traces.len());
        for (a, b) in back.traces.iter().zip(&bundle.traces) {
            assert_eq!((a.band_i, a.band_j), (b.band_i, b.band_j));
            assert_eq!(a.phase, b.phase);
            assert_eq!(a.power_db, b.power_db);
        }
    }

    #[test]
    fn writers_are_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let entries = vec![
            ScanEntry {
                mask: 1,
                duan: 0.9,
                epr: 0.7,
                nu_min: 0.8,
            },
            ScanEntry {
                mask: 3,
                duan: 1.9,
                epr: 1.1,
                nu_min: 1.0,
            },
        ];
        write_scan_json(&a, &entries).unwrap();
        write_scan_json(&b, &entries).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn band_powers_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("powers.json");
        let powers = vec![0.04, 0.08, 0.05];
        write_band_powers(&path, &powers).unwrap();
        assert_eq!(read_band_powers(&path).unwrap(), powers);
    }

    #[test]
    fn non_contiguous_shape_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.csv");
        std::fs::write(
            &path,
            "shape_id,band_i,band_j,phase,power_db\n\
             0,0,0,0.0,1.0\n\
             1,0,1,0.0,1.0\n\
             0,0,0,0.1,1.0\n",
        )
        .unwrap();
        let err = read_traces(&path, vec![0.5, 0.5]).unwrap_err();
        assert!(err.to_string().contains("contiguous"), "{err}");
    }
}
