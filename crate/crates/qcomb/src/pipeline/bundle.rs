use crate::error::{Error, Result};
use crate::pipeline::trace::{extract_extrema, ExtremaOptions, Trace, TraceStats};
use crate::scalar::Scalar;
use crate::state::covariance::CovarianceState;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// A complete measurement set: one phase scan per band shape (i <= j) plus
/// the relative LO power of each band.
#[derive(Clone, Debug)]
pub struct TraceBundle<T> {
    pub traces: Vec<Trace<T>>,
    pub band_powers: Vec<T>,
}

impl<T: Scalar> TraceBundle<T> {
    pub fn n_bands(&self) -> usize {
        self.band_powers.len()
    }

    /// Checks that every shape (i <= j) appears exactly once and that band
    /// indices stay in range. Reports all missing shapes at once.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_bands();
        if n < 2 {
            return Err(Error::Data(format!("{n} band powers, need at least 2")));
        }
        for (k, &p) in self.band_powers.iter().enumerate() {
            if !(p > T::zero()) {
                return Err(Error::Data(format!(
                    "band {k} power {} is not positive",
                    p.to_f64_lit()
                )));
            }
        }
        let mut seen = BTreeMap::new();
        for t in &self.traces {
            if t.band_i > t.band_j || t.band_j >= n {
                return Err(Error::Data(format!(
                    "trace labeled ({}, {}) is out of range for {n} bands",
                    t.band_i, t.band_j
                )));
            }
            if seen.insert((t.band_i, t.band_j), ()).is_some() {
                return Err(Error::Data(format!(
                    "duplicate trace for shape ({}, {})",
                    t.band_i, t.band_j
                )));
            }
        }
        let mut missing = Vec::new();
        for i in 0..n {
            for j in i..n {
                if !seen.contains_key(&(i, j)) {
                    missing.push(format!("({i}, {j})"));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Data(format!(
                "missing traces for shapes: {}",
                missing.join(", ")
            )));
        }
        Ok(())
    }

    /// Runs extremum extraction on every trace.
    pub fn extract_all(&self, opts: &ExtremaOptions<T>) -> Result<BundleStats<T>> {
        self.validate()?;
        let mut stats = BTreeMap::new();
        for t in &self.traces {
            stats.insert((t.band_i, t.band_j), extract_extrema(t, opts)?);
        }
        Ok(BundleStats {
            stats,
            band_powers: self.band_powers.clone(),
        })
    }
}

/// Per-shape extremum statistics keyed by (band_i, band_j).
#[derive(Clone, Debug)]
pub struct BundleStats<T> {
    pub stats: BTreeMap<(usize, usize), TraceStats<T>>,
    pub band_powers: Vec<T>,
}

impl<T: Scalar> BundleStats<T> {
    pub fn n_bands(&self) -> usize {
        self.band_powers.len()
    }

    /// Raw covariance blocks from per-shape dB levels supplied by `level`
    /// (typically the extremum means, or one Monte Carlo draw around them).
    ///
    /// Diagonals come straight from the single-band shapes. An off-diagonal
    /// entry inverts the two-band LO variance
    /// s = wi C_ii + wj C_jj + 2 sqrt(wi wj) C_ij with wi = Pi/(Pi + Pj).
    pub fn assemble_matrices(
        &self,
        mut level: impl FnMut(&TraceStats<T>, bool) -> T,
    ) -> Result<(DMatrix<T>, DMatrix<T>)> {
        let n = self.n_bands();
        let ten = T::from_f64_lit(10.0);
        let lin = |db: T| ten.powf(db / ten);
        let mut cx = DMatrix::zeros(n, n);
        let mut cp = DMatrix::zeros(n, n);
        for i in 0..n {
            let s = self
                .stats
                .get(&(i, i))
                .ok_or_else(|| Error::Data(format!("missing shape ({i}, {i})")))?;
            cx[(i, i)] = lin(level(s, true));
            cp[(i, i)] = lin(level(s, false));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let s = self
                    .stats
                    .get(&(i, j))
                    .ok_or_else(|| Error::Data(format!("missing shape ({i}, {j})")))?;
                let (pi, pj) = (self.band_powers[i], self.band_powers[j]);
                let wi = pi / (pi + pj);
                let wj = pj / (pi + pj);
                let f = T::one() / ((wi * wj).sqrt() * T::from_f64_lit(2.0));
                let vx = lin(level(s, true));
                let vp = lin(level(s, false));
                cx[(i, j)] = (vx - wi * cx[(i, i)] - wj * cx[(j, j)]) * f;
                cx[(j, i)] = cx[(i, j)];
                cp[(i, j)] = (vp - wi * cp[(i, i)] - wj * cp[(j, j)]) * f;
                cp[(j, i)] = cp[(i, j)];
            }
        }
        Ok((cx, cp))
    }

    /// Band-space covariance state from the extremum means, with warnings
    /// for marginal physicality. Fails if a block is not positive definite.
    pub fn assemble_covariance(&self) -> Result<(CovarianceState<T>, Vec<String>)> {
        let (cx, cp) = self.assemble_matrices(|s, x| if x { s.x_mean_db } else { s.p_mean_db })?;
        let state = CovarianceState::new(cx, cp)?;
        let mut warnings = Vec::new();
        let nu = state.min_symplectic();
        if nu < T::from_f64_lit(0.8) {
            warnings.push(format!(
                "assembled state has minimum symplectic eigenvalue {:.4}, well below shot noise; \
                 calibration or extraction is suspect",
                nu.to_f64_lit()
            ));
        }
        for s in self.stats.values() {
            if s.n_x < 3 || s.n_p < 3 {
                warnings.push(format!(
                    "shape ({}, {}) pooled only {} x and {} p extrema",
                    s.band_i, s.band_j, s.n_x, s.n_p
                ));
            }
        }
        Ok((state, warnings))
    }
}
