use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One homodyne phase scan taken with the LO shaped onto band `band_i`, or
/// onto the power-weighted sum of two bands when `band_j` differs. Phase is
/// in radians; power is the measured quadrature variance in dB relative to
/// shot noise.
#[derive(Clone, Debug)]
pub struct Trace<T> {
    pub band_i: usize,
    pub band_j: usize,
    pub phase: Vec<T>,
    pub power_db: Vec<T>,
}

/// Pooled extremum statistics of one trace. The x quadrature is read at
/// phases 0 mod pi, p at pi/2 mod pi.
#[derive(Clone, Copy, Debug)]
pub struct TraceStats<T> {
    pub band_i: usize,
    pub band_j: usize,
    pub x_mean_db: T,
    pub x_std_db: T,
    pub p_mean_db: T,
    pub p_std_db: T,
    pub n_x: usize,
    pub n_p: usize,
}

/// Knobs for extremum detection.
#[derive(Clone, Copy, Debug)]
pub struct ExtremaOptions<T> {
    /// Moving-average window as a fraction of the trace length.
    pub smooth_fraction: T,
    /// Minimum prominence (dB) for a smoothed extremum to count.
    pub prominence_db: T,
    /// Accepted distance (degrees) between an extremum phase mod pi and its
    /// quadrature's nominal phase.
    pub phase_tol_deg: T,
}

impl<T: Scalar> Default for ExtremaOptions<T> {
    fn default() -> Self {
        Self {
            smooth_fraction: T::from_f64_lit(0.01),
            prominence_db: T::from_f64_lit(0.5),
            phase_tol_deg: T::from_f64_lit(10.0),
        }
    }
}

/// Locates phase-scan extrema and pools them into per-quadrature statistics.
///
/// Detection runs on a moving-average smoothed copy; each detected extremum
/// is then refined to the raw extreme value within one window. Needs at
/// least two extrema per quadrature.
pub fn extract_extrema<T: Scalar>(
    trace: &Trace<T>,
    opts: &ExtremaOptions<T>,
) -> Result<TraceStats<T>> {
    let n = trace.phase.len();
    if n != trace.power_db.len() {
        return Err(Error::Data(format!(
            "trace ({}, {}): {} phases vs {} powers",
            trace.band_i,
            trace.band_j,
            n,
            trace.power_db.len()
        )));
    }
    if n < 16 {
        return Err(Error::Data(format!(
            "trace ({}, {}) has only {n} samples",
            trace.band_i, trace.band_j
        )));
    }
    for w in trace.phase.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Data(format!(
                "trace ({}, {}) phases are not strictly increasing",
                trace.band_i, trace.band_j
            )));
        }
    }

    let window = smoothing_window(n, opts.smooth_fraction);
    let smoothed = moving_average(&trace.power_db, window);
    let maxima = prominent_extrema(&smoothed, opts.prominence_db, false);
    let minima = prominent_extrema(&smoothed, opts.prominence_db, true);

    let mut xs = Vec::new();
    let mut ps = Vec::new();
    let tol = opts.phase_tol_deg * T::pi() / T::from_f64_lit(180.0);
    for (idx, is_min) in maxima
        .iter()
        .map(|&i| (i, false))
        .chain(minima.iter().map(|&i| (i, true)))
    {
        let (value, at) = refine(&trace.power_db, idx, window, is_min);
        let phase = trace.phase[at];
        let pi = T::pi();
        let frac = phase - (phase / pi).floor() * pi;
        let d_x = frac.min(pi - frac);
        let d_p = (frac - pi / T::from_f64_lit(2.0)).abs();
        if d_x <= tol {
            xs.push(value);
        } else if d_p <= tol {
            ps.push(value);
        } else {
            return Err(Error::Data(format!(
                "trace ({}, {}): extremum at phase {} is {} deg from any quadrature",
                trace.band_i,
                trace.band_j,
                phase.to_f64_lit(),
                (d_x.min(d_p) * T::from_f64_lit(180.0) / pi).to_f64_lit()
            )));
        }
    }
    let (x_mean_db, x_std_db) = pooled(&xs, trace, "x")?;
    let (p_mean_db, p_std_db) = pooled(&ps, trace, "p")?;
    Ok(TraceStats {
        band_i: trace.band_i,
        band_j: trace.band_j,
        x_mean_db,
        x_std_db,
        p_mean_db,
        p_std_db,
        n_x: xs.len(),
        n_p: ps.len(),
    })
}

fn smoothing_window<T: Scalar>(n: usize, fraction: T) -> usize {
    let w = (fraction * T::from_usize(n).expect("trace length fits scalar"))
        .round()
        .to_f64_lit()
        .max(1.0) as usize;
    if w % 2 == 0 {
        w + 1
    } else {
        w
    }
}

fn moving_average<T: Scalar>(raw: &[T], window: usize) -> Vec<T> {
    let half = window / 2;
    let n = raw.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let sum = raw[lo..hi].iter().fold(T::zero(), |acc, &v| acc + v);
            sum / T::from_usize(hi - lo).expect("window fits scalar")
        })
        .collect()
}

/// Local maxima (or minima) of `s` whose prominence reaches `threshold`.
/// The base on each side is the lowest point reached before a higher value
/// or the signal edge; boundary samples may qualify using their one side.
fn prominent_extrema<T: Scalar>(s: &[T], threshold: T, minima: bool) -> Vec<usize> {
    let n = s.len();
    let val = |i: usize| if minima { -s[i] } else { s[i] };
    let mut out = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || val(i) >= val(i - 1);
        let right_ok = i + 1 == n || val(i) > val(i + 1);
        if !(left_ok && right_ok) || (i == 0 && i + 1 == n) {
            continue;
        }
        let mut bases = Vec::with_capacity(2);
        if i > 0 {
            let mut low = val(i - 1);
            let mut j = i;
            while j > 0 {
                j -= 1;
                if val(j) > val(i) {
                    break;
                }
                low = low.min(val(j));
            }
            bases.push(low);
        }
        if i + 1 < n {
            let mut low = val(i + 1);
            let mut j = i;
            while j + 1 < n {
                j += 1;
                if val(j) > val(i) {
                    break;
                }
                low = low.min(val(j));
            }
            bases.push(low);
        }
        let base = bases
            .iter()
            .fold(-T::max_value().expect("bounded scalar"), |acc, &b| acc.max(b));
        if val(i) - base >= threshold {
            out.push(i);
        }
    }
    out
}

/// Raw extreme value within one smoothing window of the detected index.
fn refine<T: Scalar>(raw: &[T], idx: usize, window: usize, minima: bool) -> (T, usize) {
    let lo = idx.saturating_sub(window);
    let hi = (idx + window + 1).min(raw.len());
    let mut best = idx;
    for j in lo..hi {
        let better = if minima {
            raw[j] < raw[best]
        } else {
            raw[j] > raw[best]
        };
        if better {
            best = j;
        }
    }
    (raw[best], best)
}

fn pooled<T: Scalar>(values: &[T], trace: &Trace<T>, which: &str) -> Result<(T, T)> {
    if values.len() < 2 {
        return Err(Error::Data(format!(
            "trace ({}, {}): found {} {which} extrema, need at least 2",
            trace.band_i,
            trace.band_j,
            values.len()
        )));
    }
    let n = T::from_usize(values.len()).expect("extremum count fits scalar");
    let mean = values.iter().fold(T::zero(), |acc, &v| acc + v) / n;
    let ss = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
    Ok((mean, (ss / (n - T::one())).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cosine_trace(dbx: f64, dbp: f64, periods: usize, spp: usize) -> Trace<f64> {
        let n = periods * spp + 1;
        let phase: Vec<f64> = (0..n)
            .map(|m| m as f64 * std::f64::consts::PI / spp as f64)
            .collect();
        let power_db = phase
            .iter()
            .map(|&t| dbx * t.cos().powi(2) + dbp * t.sin().powi(2))
            .collect();
        Trace {
            band_i: 0,
            band_j: 1,
            phase,
            power_db,
        }
    }

    #[test]
    fn clean_scan_recovers_both_levels() {
        let trace = cosine_trace(-3.0, 5.0, 4, 100);
        let stats = extract_extrema(&trace, &ExtremaOptions::default()).unwrap();
        assert_eq!(stats.n_x, 5);
        assert_eq!(stats.n_p, 4);
        assert_relative_eq!(stats.x_mean_db, -3.0, epsilon = 1e-12);
        assert_relative_eq!(stats.p_mean_db, 5.0, epsilon = 1e-12);
        assert_relative_eq!(stats.x_std_db, 0.0, epsilon = 1e-12);
        assert_relative_eq!(stats.p_std_db, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn swapped_levels_classify_by_phase_not_by_sign() {
        // x sitting above p must still be read as x
        let trace = cosine_trace(4.0, -2.0, 4, 100);
        let stats = extract_extrema(&trace, &ExtremaOptions::default()).unwrap();
        assert_relative_eq!(stats.x_mean_db, 4.0, epsilon = 1e-12);
        assert_relative_eq!(stats.p_mean_db, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn shallow_contrast_needs_lower_prominence() {
        let trace = cosine_trace(-0.10, 0.10, 4, 100);
        assert!(extract_extrema(&trace, &ExtremaOptions::default()).is_err());
        let opts = ExtremaOptions {
            prominence_db: 0.05,
            ..ExtremaOptions::default()
        };
        let stats = extract_extrema(&trace, &opts).unwrap();
        assert_relative_eq!(stats.x_mean_db, -0.10, epsilon = 1e-12);
        assert_relative_eq!(stats.p_mean_db, 0.10, epsilon = 1e-12);
    }

    #[test]
    fn non_monotone_phase_rejected() {
        let mut trace = cosine_trace(-3.0, 5.0, 4, 100);
        trace.phase[10] = trace.phase[9];
        assert!(matches!(
            extract_extrema(&trace, &ExtremaOptions::default()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn off_grid_extremum_phase_rejected() {
        // shift the whole scan by a quarter of pi so extrema sit 45 deg off
        let mut trace = cosine_trace(-3.0, 5.0, 4, 100);
        let shift = std::f64::consts::PI / 4.0;
        for p in trace.phase.iter_mut() {
            *p += shift;
        }
        assert!(matches!(
            extract_extrema(&trace, &ExtremaOptions::default()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn noisy_scan_means_within_tolerance() {
        let mut trace = cosine_trace(-3.0, 5.0, 20, 100);
        // deterministic ripple well below prominence
        for (m, v) in trace.power_db.iter_mut().enumerate() {
            *v += 0.05 * ((m * 7919 % 1000) as f64 / 1000.0 - 0.5);
        }
        let stats = extract_extrema(&trace, &ExtremaOptions::default()).unwrap();
        assert_eq!(stats.n_x, 21);
        assert_eq!(stats.n_p, 20);
        assert!((stats.x_mean_db + 3.0).abs() < 0.05);
        assert!((stats.p_mean_db - 5.0).abs() < 0.05);
    }
}
