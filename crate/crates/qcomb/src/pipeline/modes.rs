use crate::error::{Error, Result};
use crate::pipeline::bundle::BundleStats;
use crate::pipeline::monte_carlo::{resample, sample_matrices, McOptions, ModeCandidate};
use crate::scalar::Scalar;
use crate::state::squeezing::Quadrature;
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions<T> {
    /// Number of uncorrelated modes to keep.
    pub k_modes: usize,
    /// Orthogonalization residual below which a candidate duplicates an
    /// already-selected direction (its partner quadrature) and is skipped.
    pub drop_tol: T,
}

impl<T: Scalar> Default for ExtractOptions<T> {
    fn default() -> Self {
        Self {
            k_modes: 10,
            drop_tol: T::from_f64_lit(0.2),
        }
    }
}

/// One extracted mode with its squeezed and antisqueezed variance
/// statistics in shot-noise units.
#[derive(Clone, Debug)]
pub struct ExtractedMode<T> {
    pub vector: DVector<T>,
    pub squeezed_quadrature: Quadrature,
    pub squeezed_mean: T,
    pub squeezed_std: T,
    pub anti_mean: T,
    pub anti_std: T,
    /// Squeezed mean stays below shot noise by at least two standard
    /// deviations of the resampled estimate.
    pub nonclassical: bool,
}

#[derive(Clone, Debug)]
pub struct ModeSet<T> {
    /// Sorted by squeezed variance, most squeezed first.
    pub modes: Vec<ExtractedMode<T>>,
    pub nonclassical_count: usize,
}

/// Finds the uncorrelated mode basis of a measured bundle.
///
/// Pass 1 resamples the covariance, ranks the 2n eigenvalue streams by
/// robustness (|mean - 1| / std), and Gram-Schmidt selects `k_modes`
/// directions; a stream whose direction already lies in the selected span
/// is the partner quadrature of a kept mode and is dropped. Pass 2 replays
/// the same sample stream and projects every sample onto the fixed
/// directions, which sidesteps eigenvalue-crossing noise in the per-mode
/// statistics.
pub fn extract_modes<T>(
    stats: &BundleStats<T>,
    mc: &McOptions,
    opts: &ExtractOptions<T>,
) -> Result<ModeSet<T>>
where
    T: Scalar + Send + Sync,
    StandardNormal: Distribution<T>,
{
    let n = stats.n_bands();
    if opts.k_modes == 0 || opts.k_modes > n {
        return Err(Error::Model(format!(
            "{} modes requested from {n} bands",
            opts.k_modes
        )));
    }
    if !(opts.drop_tol > T::zero() && opts.drop_tol < T::one()) {
        return Err(Error::Model(format!(
            "drop tolerance {} outside (0, 1)",
            opts.drop_tol.to_f64_lit()
        )));
    }
    let ensemble = resample(stats, mc)?;

    let mut ranked: Vec<&ModeCandidate<T>> = ensemble.candidates.iter().collect();
    ranked.sort_by(|a, b| {
        b.robustness
            .partial_cmp(&a.robustness)
            .expect("finite robustness")
            .then_with(|| quadrature_rank(a.quadrature).cmp(&quadrature_rank(b.quadrature)))
            .then_with(|| dominant_index(&a.vector).cmp(&dominant_index(&b.vector)))
    });

    let mut basis: Vec<DVector<T>> = Vec::with_capacity(opts.k_modes);
    for cand in ranked {
        if basis.len() == opts.k_modes {
            break;
        }
        let mut v = cand.vector.clone();
        // two projection sweeps keep the basis orthonormal to roundoff
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, T::one());
            }
        }
        if v.norm() <= opts.drop_tol {
            continue;
        }
        v.normalize_mut();
        basis.push(v);
    }
    if basis.len() < opts.k_modes {
        return Err(Error::Model(format!(
            "only {} independent directions among {} candidates, {} requested",
            basis.len(),
            2 * n,
            opts.k_modes
        )));
    }

    // pass 2: fixed-direction variance statistics over the same samples
    let per_sample: Vec<Vec<(T, T)>> = (0..mc.samples)
        .into_par_iter()
        .map(|s| {
            let (cx, cp) = sample_matrices(stats, mc.seed, s)?;
            Ok(basis
                .iter()
                .map(|u| {
                    (
                        (u.transpose() * &cx * u)[(0, 0)],
                        (u.transpose() * &cp * u)[(0, 0)],
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let m = T::from_usize(mc.samples).expect("sample count fits scalar");
    let two = T::from_f64_lit(2.0);
    let mut modes = Vec::with_capacity(basis.len());
    for (k, vector) in basis.into_iter().enumerate() {
        let stat = |side: usize| {
            let mean = per_sample
                .iter()
                .fold(T::zero(), |acc, row| {
                    acc + if side == 0 { row[k].0 } else { row[k].1 }
                })
                / m;
            let ss = per_sample.iter().fold(T::zero(), |acc, row| {
                let v = if side == 0 { row[k].0 } else { row[k].1 };
                acc + (v - mean) * (v - mean)
            });
            (mean, (ss / (m - T::one())).sqrt())
        };
        let (x_mean, x_std) = stat(0);
        let (p_mean, p_std) = stat(1);
        let (squeezed_quadrature, sq, anti) = if x_mean <= p_mean {
            (Quadrature::X, (x_mean, x_std), (p_mean, p_std))
        } else {
            (Quadrature::P, (p_mean, p_std), (x_mean, x_std))
        };
        modes.push(ExtractedMode {
            vector,
            squeezed_quadrature,
            squeezed_mean: sq.0,
            squeezed_std: sq.1,
            anti_mean: anti.0,
            anti_std: anti.1,
            nonclassical: sq.0 + two * sq.1 < T::one(),
        });
    }
    modes.sort_by(|a, b| {
        a.squeezed_mean
            .partial_cmp(&b.squeezed_mean)
            .expect("finite variances")
    });
    let nonclassical_count = modes.iter().filter(|m| m.nonclassical).count();
    Ok(ModeSet {
        modes,
        nonclassical_count,
    })
}

fn quadrature_rank(q: Quadrature) -> u8 {
    match q {
        Quadrature::X => 0,
        Quadrature::P => 1,
    }
}

fn dominant_index<T: Scalar>(v: &DVector<T>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    best
}
