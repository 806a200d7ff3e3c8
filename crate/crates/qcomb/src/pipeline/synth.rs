use crate::error::{Error, Result};
use crate::pipeline::bundle::TraceBundle;
use crate::pipeline::trace::Trace;
use crate::scalar::Scalar;
use crate::state::bands::BandPartition;
use crate::state::covariance::CovarianceState;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Extremum-level noise added to synthesized scans.
#[derive(Clone, Debug)]
pub enum Jitter<T> {
    None,
    /// Independent per-shape dB sigmas for the x and p extremum levels,
    /// indexed by the shape's lexicographic rank. Draws are moment-matched
    /// within each quadrature subset, so the extremum sample mean and
    /// sample std of every scan equal the requested levels exactly.
    MomentMatched {
        db_x: Vec<T>,
        db_p: Vec<T>,
        seed: u64,
    },
}

impl<T: Scalar> Jitter<T> {
    /// Same sigma for every shape and both quadratures.
    pub fn uniform(n_bands: usize, sigma_db: T, seed: u64) -> Self {
        let shapes = n_bands * (n_bands + 1) / 2;
        Jitter::MomentMatched {
            db_x: vec![sigma_db; shapes],
            db_p: vec![sigma_db; shapes],
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthOptions<T> {
    /// Number of pi periods covered by each scan.
    pub periods: usize,
    /// Samples per pi of phase; must be even so extrema land on samples.
    pub samples_per_period: usize,
    pub jitter: Jitter<T>,
}

impl<T: Scalar> Default for SynthOptions<T> {
    fn default() -> Self {
        Self {
            periods: 20,
            samples_per_period: 100,
            jitter: Jitter::None,
        }
    }
}

/// Synthesizes one phase scan per band shape (i <= j) from a band-space
/// state. Scans interpolate between per-extremum dB levels with the
/// pi-periodic cos^2 law, so extrema sit exactly at multiples of pi/2.
pub fn synthesize<T: Scalar>(
    state: &CovarianceState<T>,
    bands: &BandPartition<T>,
    opts: &SynthOptions<T>,
) -> Result<TraceBundle<T>>
where
    StandardNormal: Distribution<T>,
{
    let n = bands.len();
    if state.n() != n {
        return Err(Error::Model(format!(
            "state has {} modes but the partition has {n} bands",
            state.n()
        )));
    }
    if opts.periods == 0 || opts.samples_per_period < 8 || opts.samples_per_period % 2 != 0 {
        return Err(Error::Model(
            "scan needs at least one period and an even sample count >= 8 per period".into(),
        ));
    }
    let shapes = n * (n + 1) / 2;
    if let Jitter::MomentMatched { db_x, db_p, .. } = &opts.jitter {
        if db_x.len() != shapes || db_p.len() != shapes {
            return Err(Error::Model(format!(
                "jitter sigmas cover {} / {} shapes, expected {shapes}",
                db_x.len(),
                db_p.len()
            )));
        }
    }

    let spp = opts.samples_per_period;
    let n_extrema = 2 * opts.periods + 1;
    let n_samples = opts.periods * spp + 1;
    let ten = T::from_f64_lit(10.0);
    let mut traces = Vec::with_capacity(shapes);
    let mut shape_idx = 0usize;
    for i in 0..n {
        for j in i..n {
            let u = bands.shape_weights(i, j);
            let dbx = ten * state.x_variance(&u).log10();
            let dbp = ten * state.p_variance(&u).log10();
            let mut levels: Vec<T> = (0..n_extrema)
                .map(|k| if k % 2 == 0 { dbx } else { dbp })
                .collect();
            if let Jitter::MomentMatched { db_x, db_p, seed } = &opts.jitter {
                let mut rng = ChaCha12Rng::seed_from_u64(*seed);
                rng.set_stream(shape_idx as u64);
                let z: Vec<T> = (0..n_extrema)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                apply_matched(&mut levels, &z, 0, dbx, db_x[shape_idx]);
                apply_matched(&mut levels, &z, 1, dbp, db_p[shape_idx]);
            }
            let half = spp / 2;
            let pi = T::pi();
            let phase: Vec<T> = (0..n_samples)
                .map(|m| {
                    T::from_usize(m).expect("sample index fits scalar") * pi
                        / T::from_usize(spp).expect("sample count fits scalar")
                })
                .collect();
            let power_db: Vec<T> = (0..n_samples)
                .map(|m| {
                    let k = (m / half).min(n_extrema - 2);
                    let rel = phase[m]
                        - T::from_usize(k).expect("extremum index fits scalar") * pi
                            / T::from_f64_lit(2.0);
                    let c = rel.cos();
                    let s = rel.sin();
                    levels[k] * c * c + levels[k + 1] * s * s
                })
                .collect();
            traces.push(Trace {
                band_i: i,
                band_j: j,
                phase,
                power_db,
            });
            shape_idx += 1;
        }
    }
    Ok(TraceBundle {
        traces,
        band_powers: bands.powers().to_vec(),
    })
}

/// Rescales the draws for one quadrature subset (levels at parity `parity`)
/// so their sample mean is exactly `mean` and sample std exactly `sigma`.
fn apply_matched<T: Scalar>(levels: &mut [T], z: &[T], parity: usize, mean: T, sigma: T) {
    let picks: Vec<usize> = (0..levels.len()).filter(|k| k % 2 == parity).collect();
    let m = T::from_usize(picks.len()).expect("extremum count fits scalar");
    let z_mean = picks.iter().fold(T::zero(), |acc, &k| acc + z[k]) / m;
    let ss = picks
        .iter()
        .fold(T::zero(), |acc, &k| acc + (z[k] - z_mean) * (z[k] - z_mean));
    let z_std = (ss / (m - T::one())).sqrt();
    if sigma <= T::zero() || z_std <= T::zero() {
        for &k in &picks {
            levels[k] = mean;
        }
        return;
    }
    for &k in &picks {
        levels[k] = mean + sigma * (z[k] - z_mean) / z_std;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::trace::{extract_extrema, ExtremaOptions};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn toy_setup() -> (CovarianceState<f64>, BandPartition<f64>) {
        let lo = DVector::from_element(20, (1.0 / 20.0_f64).sqrt());
        let bands = BandPartition::equal_energy(&lo, 2, 0.0).unwrap();
        // every shape keeps a clear x/p contrast so extrema stay detectable
        let cx = DMatrix::from_row_slice(2, 2, &[2.6, -1.8, -1.8, 1.4]);
        let cp = DMatrix::from_row_slice(2, 2, &[1.2, 0.8, 0.8, 1.9]);
        (CovarianceState::new(cx, cp).unwrap(), bands)
    }

    #[test]
    fn noise_free_scan_extrema_hit_exact_levels() {
        let (state, bands) = toy_setup();
        let bundle = synthesize(&state, &bands, &SynthOptions::default()).unwrap();
        assert_eq!(bundle.traces.len(), 3);
        let t = &bundle.traces[1]; // shape (0, 1)
        assert_eq!((t.band_i, t.band_j), (0, 1));
        let u = bands.shape_weights(0, 1);
        let want_x = 10.0 * state.x_variance(&u).log10();
        let stats = extract_extrema(t, &ExtremaOptions::default()).unwrap();
        assert_eq!(stats.n_x, 21);
        assert_eq!(stats.n_p, 20);
        assert_relative_eq!(stats.x_mean_db, want_x, epsilon = 1e-10);
        assert_relative_eq!(stats.x_std_db, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn matched_jitter_reproduces_requested_moments_exactly() {
        let (state, bands) = toy_setup();
        let opts = SynthOptions {
            jitter: Jitter::uniform(2, 0.05, 7),
            ..SynthOptions::default()
        };
        let bundle = synthesize(&state, &bands, &opts).unwrap();
        let extract = ExtremaOptions {
            prominence_db: 0.2,
            ..ExtremaOptions::default()
        };
        for t in &bundle.traces {
            let u = bands.shape_weights(t.band_i, t.band_j);
            let stats = extract_extrema(t, &extract).unwrap();
            assert_relative_eq!(
                stats.x_mean_db,
                10.0 * state.x_variance(&u).log10(),
                epsilon = 1e-9
            );
            assert_relative_eq!(stats.x_std_db, 0.05, epsilon = 1e-9);
            assert_relative_eq!(stats.p_std_db, 0.05, epsilon = 1e-9);
        }
    }

    #[test]
    fn same_seed_same_bundle() {
        let (state, bands) = toy_setup();
        let opts = SynthOptions {
            jitter: Jitter::uniform(2, 0.1, 42),
            ..SynthOptions::default()
        };
        let a = synthesize(&state, &bands, &opts).unwrap();
        let b = synthesize(&state, &bands, &opts).unwrap();
        for (ta, tb) in a.traces.iter().zip(&b.traces) {
            assert_eq!(ta.power_db, tb.power_db);
        }
    }
}
