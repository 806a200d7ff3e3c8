use crate::comb::supermode::fix_sign;
use crate::error::{Error, Result};
use crate::pipeline::bundle::BundleStats;
use crate::scalar::Scalar;
use crate::state::covariance::CovarianceState;
use crate::state::squeezing::Quadrature;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 1,
        }
    }
}

/// One eigenvalue stream of the resampled covariances: the eigenvector is
/// taken from the mean state, the statistics from the matched per-sample
/// eigenvalues of its quadrature block.
#[derive(Clone, Debug)]
pub struct ModeCandidate<T> {
    pub quadrature: Quadrature,
    /// Eigenvalue rank within the block, ascending.
    pub index: usize,
    pub mean: T,
    pub std: T,
    pub vector: DVector<T>,
    /// |mean - 1| / std: how far the stream sits from shot noise.
    pub robustness: T,
}

#[derive(Clone, Debug)]
pub struct McEnsemble<T> {
    /// 2n candidates: the n x-block streams (ascending), then the n
    /// p-block streams.
    pub candidates: Vec<ModeCandidate<T>>,
    pub mean_state: CovarianceState<T>,
}

/// Draws per-shape dB levels around the extracted means, one normal draw
/// per quadrature per shape, and assembles the sample's covariance blocks.
/// Sample `s` always uses its own RNG stream, so results are identical for
/// any parallel schedule.
pub(crate) fn sample_matrices<T: Scalar>(
    stats: &BundleStats<T>,
    seed: u64,
    s: usize,
) -> Result<(DMatrix<T>, DMatrix<T>)>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    let mut draws = std::collections::BTreeMap::new();
    for (&key, st) in &stats.stats {
        let zx: T = StandardNormal.sample(&mut rng);
        let zp: T = StandardNormal.sample(&mut rng);
        draws.insert(
            key,
            (
                st.x_mean_db + st.x_std_db * zx,
                st.p_mean_db + st.p_std_db * zp,
            ),
        );
    }
    stats.assemble_matrices(|st, is_x| {
        let &(x, p) = draws
            .get(&(st.band_i, st.band_j))
            .expect("draws cover every shape");
        if is_x {
            x
        } else {
            p
        }
    })
}

/// Ascending eigenpairs of a symmetric matrix with deterministic signs.
pub(crate) fn sorted_eigh<T: Scalar>(m: &DMatrix<T>) -> (Vec<T>, Vec<DVector<T>>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = eig.eigenvectors.column(i).into_owned();
            fix_sign(&mut v);
            v
        })
        .collect();
    (values, vectors)
}

/// Matches sample eigenvectors to the reference basis by greedily taking
/// the largest remaining |overlap|, then returns the sample eigenvalues in
/// reference order. Guards against eigenvalue crossings between samples.
fn match_to_reference<T: Scalar>(
    reference: &[DVector<T>],
    values: &[T],
    vectors: &[DVector<T>],
) -> Vec<T> {
    let n = reference.len();
    let mut overlap = vec![vec![T::zero(); n]; n];
    for (r, refv) in reference.iter().enumerate() {
        for (c, v) in vectors.iter().enumerate() {
            overlap[r][c] = refv.dot(v).abs();
        }
    }
    let mut taken_r = vec![false; n];
    let mut taken_c = vec![false; n];
    let mut out = vec![T::zero(); n];
    for _ in 0..n {
        let (mut br, mut bc, mut best) = (usize::MAX, usize::MAX, -T::one());
        for r in 0..n {
            if taken_r[r] {
                continue;
            }
            for c in 0..n {
                if !taken_c[c] && overlap[r][c] > best {
                    best = overlap[r][c];
                    br = r;
                    bc = c;
                }
            }
        }
        taken_r[br] = true;
        taken_c[bc] = true;
        out[br] = values[bc];
    }
    out
}

/// Propagates extraction uncertainty into eigenvalue statistics by
/// resampling the per-shape dB levels `samples` times.
pub fn resample<T>(stats: &BundleStats<T>, opts: &McOptions) -> Result<McEnsemble<T>>
where
    T: Scalar + Send + Sync,
    StandardNormal: Distribution<T>,
{
    if opts.samples < 2 {
        return Err(Error::Model(format!(
            "{} Monte Carlo samples, need at least 2",
            opts.samples
        )));
    }
    let (mean_state, _) = stats.assemble_covariance()?;
    let n = mean_state.n();
    let (_, ref_x) = sorted_eigh(mean_state.cx());
    let (_, ref_p) = sorted_eigh(mean_state.cp());

    let per_sample: Vec<(Vec<T>, Vec<T>)> = (0..opts.samples)
        .into_par_iter()
        .map(|s| {
            let (cx, cp) = sample_matrices(stats, opts.seed, s)?;
            let (vx, ux) = sorted_eigh(&cx);
            let (vp, up) = sorted_eigh(&cp);
            Ok((
                match_to_reference(&ref_x, &vx, &ux),
                match_to_reference(&ref_p, &vp, &up),
            ))
        })
        .collect::<Result<_>>()?;

    let mut candidates = Vec::with_capacity(2 * n);
    for (quadrature, reference, pick) in [
        (Quadrature::X, &ref_x, 0usize),
        (Quadrature::P, &ref_p, 1usize),
    ] {
        for r in 0..n {
            let series: Vec<T> = per_sample
                .iter()
                .map(|(x, p)| if pick == 0 { x[r] } else { p[r] })
                .collect();
            let m = T::from_usize(series.len()).expect("sample count fits scalar");
            let mean = series.iter().fold(T::zero(), |acc, &v| acc + v) / m;
            let ss = series
                .iter()
                .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
            let std = (ss / (m - T::one())).sqrt();
            let floor = T::from_f64_lit(1e-30);
            candidates.push(ModeCandidate {
                quadrature,
                index: r,
                mean,
                std,
                vector: reference[r].clone(),
                robustness: (mean - T::one()).abs() / std.max(floor),
            });
        }
    }
    Ok(McEnsemble {
        candidates,
        mean_state,
    })
}
