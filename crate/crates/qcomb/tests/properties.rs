//! Invariants of the covariance-state algebra and the witness functions:
//! vacuum identities, two-mode squeezed closed forms, loss/commutator
//! behavior, and symmetries the pipeline must respect.

use approx::assert_relative_eq;
use proptest::prelude::*;
use qcomb::nalgebra::{DMatrix, DVector};
use qcomb::pipeline::{
    extract_modes, resample, synthesize, ExtractOptions, ExtremaOptions, Jitter, McOptions,
    SynthOptions,
};
use qcomb::{witness, BandPartition, CovarianceState};

/// Two-mode squeezed vacuum: sum/difference modes squeezed by e^{-2r}.
fn tmsv(r: f64) -> CovarianceState {
    let h = 0.5f64.sqrt();
    let u = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
    let dx = DVector::from_vec(vec![(-2.0 * r).exp(), (2.0 * r).exp()]);
    let dp = DVector::from_vec(vec![(2.0 * r).exp(), (-2.0 * r).exp()]);
    CovarianceState::from_modes(&u, &dx, &dp).unwrap()
}

fn rot2(t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

/// Mixed four-mode state with correlations between every pair.
fn correlated_four_mode() -> CovarianceState {
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.9, -0.3, 0.2, 0.5, 0.1, 0.8, -0.4, 0.3, -0.2, 0.5, 0.7, -0.1, 0.4, 0.1, 0.3, 0.6,
        ],
    );
    let u = a.qr().q();
    let dx = DVector::from_vec(vec![0.4, 0.6, 1.8, 2.5]);
    let dp = DVector::from_vec(vec![2.6, 1.9, 0.6, 0.45]);
    CovarianceState::from_modes(&u, &dx, &dp).unwrap()
}

#[test]
fn vacuum_identities_hold_for_every_bipartition_up_to_six_modes() {
    for n in 2..=6usize {
        let vac = CovarianceState::vacuum(n);
        assert_relative_eq!(vac.purity(), 1.0, epsilon = 1e-12);
        assert!(vac.commutator_max() <= 1e-15);
        assert_relative_eq!(vac.min_symplectic(), 1.0, epsilon = 1e-12);
        for mask in 1..((1u32 << n) - 1) {
            assert_relative_eq!(witness::duan(&vac, mask).unwrap(), 2.0, epsilon = 1e-12);
            assert_relative_eq!(witness::epr(&vac, mask).unwrap(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(
                witness::ppt_nu_min(&vac, mask).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
    }
}

proptest! {
    #[test]
    fn two_mode_squeezed_closed_forms(r in 0.0f64..=2.0) {
        let state = tmsv(r);
        let duan = witness::duan(&state, 0b01).unwrap();
        let epr = witness::epr(&state, 0b01).unwrap();
        let nu = witness::ppt_nu_min(&state, 0b01).unwrap();
        assert_relative_eq!(duan, 2.0 * (-2.0 * r).exp(), epsilon = 1e-9, max_relative = 1e-9);
        assert_relative_eq!(epr, 1.0 / (2.0 * r).cosh().powi(2), epsilon = 1e-9, max_relative = 1e-9);
        assert_relative_eq!(nu, (-2.0 * r).exp(), epsilon = 1e-9, max_relative = 1e-9);
        // pure state: unit purity, global symplectic spectrum at shot noise
        assert_relative_eq!(state.purity(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(state.min_symplectic(), 1.0, epsilon = 1e-9);
        // the two marginals are interchangeable
        assert_relative_eq!(duan, witness::duan(&state, 0b10).unwrap(), epsilon = 1e-12);
        assert_relative_eq!(nu, witness::ppt_nu_min(&state, 0b10).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn uniform_loss_keeps_commuting_blocks_commuting() {
    let state = tmsv(0.7);
    assert!(state.commutator_max() <= 1e-12);
    for eta in [1.0, 0.9, 0.6, 0.3, 0.05] {
        let lossy = state.apply_loss_uniform(eta).unwrap();
        assert!(
            lossy.commutator_max() <= 1e-12,
            "commutator {} at eta {eta}",
            lossy.commutator_max()
        );
    }
}

#[test]
fn uniform_loss_scales_any_commutator_by_eta_squared() {
    // blocks diagonal in different bases, so [Cx, Cp] != 0
    let cx = rot2(0.3) * DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.5])) * rot2(0.3).transpose();
    let cp = rot2(1.1) * DMatrix::from_diagonal(&DVector::from_vec(vec![2.5, 1.0])) * rot2(1.1).transpose();
    let state = CovarianceState::new(cx, cp).unwrap();
    let base = state.commutator_max();
    assert!(base > 1e-3);
    for eta in [0.85, 0.5, 0.2] {
        let lossy = state.apply_loss_uniform(eta).unwrap();
        assert_relative_eq!(lossy.commutator_max(), eta * eta * base, max_relative = 1e-9);
    }
}

#[test]
fn asymmetric_loss_breaks_the_commutator_monotonically() {
    let state = tmsv(0.6);
    let mut last = state.commutator_max();
    assert!(last <= 1e-12);
    for k in 1..=12 {
        let t = 0.05 * k as f64;
        let lossy = state.apply_loss(&[1.0, 1.0 - t]).unwrap();
        let c = lossy.commutator_max();
        assert!(
            c >= last - 1e-12,
            "commutator fell from {last} to {c} at t = {t}"
        );
        last = c;
    }
    assert!(last > 1e-3);
}

#[test]
fn ppt_and_purity_invariant_under_local_squeezing() {
    let state = correlated_four_mode();
    let squeeze = |st: &CovarianceState, k: usize, s: f64| {
        let mut cx = st.cx().clone();
        let mut cp = st.cp().clone();
        let n = st.n();
        for i in 0..n {
            cx[(k, i)] *= s;
            cp[(k, i)] /= s;
        }
        for i in 0..n {
            cx[(i, k)] *= s;
            cp[(i, k)] /= s;
        }
        CovarianceState::new(cx, cp).unwrap()
    };
    let local = squeeze(&squeeze(&state, 0, 0.5), 2, 1.7);
    assert_relative_eq!(local.purity(), state.purity(), max_relative = 1e-9);
    for mask in [0b0011u32, 0b0101, 0b0001] {
        assert_relative_eq!(
            witness::ppt_nu_min(&local, mask).unwrap(),
            witness::ppt_nu_min(&state, mask).unwrap(),
            max_relative = 1e-9
        );
    }
}

#[test]
fn witnesses_commute_with_band_relabeling() {
    let state = correlated_four_mode();
    let perm = [2usize, 0, 3, 1]; // new index i holds old band perm[i]
    let n = state.n();
    let mut p = DMatrix::zeros(n, n);
    for (i, &src) in perm.iter().enumerate() {
        p[(i, src)] = 1.0;
    }
    let permuted =
        CovarianceState::new(&p * state.cx() * p.transpose(), &p * state.cp() * p.transpose())
            .unwrap();

    assert_relative_eq!(permuted.purity(), state.purity(), epsilon = 1e-12);
    assert_relative_eq!(
        permuted.commutator_max(),
        state.commutator_max(),
        epsilon = 1e-12
    );
    assert_relative_eq!(
        permuted.min_symplectic(),
        state.min_symplectic(),
        epsilon = 1e-10
    );

    // per-mask equality under the relabeling
    let relabel = |mask: u32| -> u32 {
        let mut out = 0u32;
        for (i, &src) in perm.iter().enumerate() {
            if mask & (1 << src) != 0 {
                out |= 1 << i;
            }
        }
        out
    };
    for mask in 1..((1u32 << n) - 1) {
        assert_relative_eq!(
            witness::duan(&permuted, relabel(mask)).unwrap(),
            witness::duan(&state, mask).unwrap(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            witness::ppt_nu_min(&permuted, relabel(mask)).unwrap(),
            witness::ppt_nu_min(&state, mask).unwrap(),
            max_relative = 1e-9
        );
    }

    // scan results agree as multisets; nu_min is side-symmetric, epr is not
    // (it conditions side A on side B, and relabeling can swap the sides)
    let mut a: Vec<f64> = witness::scan(&state).unwrap().iter().map(|e| e.nu_min).collect();
    let mut b: Vec<f64> = witness::scan(&permuted).unwrap().iter().map(|e| e.nu_min).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(x, y, max_relative = 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn symmetric_two_band_family_orders_the_witnesses(v in 1.0f64..4.0, u in 0.02f64..0.98) {
        // x-correlated, p-anticorrelated pair: every witness has a closed form
        let c = -u * (v - 0.01);
        let cx = DMatrix::from_row_slice(2, 2, &[v, c, c, v]);
        let cp = DMatrix::from_row_slice(2, 2, &[v, -c, -c, v]);
        let state = CovarianceState::new(cx, cp).unwrap();
        let duan = witness::duan(&state, 0b01).unwrap();
        let epr = witness::epr(&state, 0b01).unwrap();
        let nu = witness::ppt_nu_min(&state, 0b01).unwrap();
        assert_relative_eq!(duan, 2.0 * (v + c), max_relative = 1e-10);
        assert_relative_eq!(nu, v + c, max_relative = 1e-10);
        assert_relative_eq!(epr, (v - c * c / v).powi(2), max_relative = 1e-10);
        // heralding order: the product witness is the most demanding
        if epr < 1.0 {
            prop_assert!(duan < 2.0);
        }
        prop_assert_eq!(duan < 2.0, nu < 1.0);
    }
}

fn toy_bundle_stats(sigma_db: f64) -> qcomb::pipeline::BundleStats<f64> {
    let lo = DVector::from_element(24, (1.0 / 24.0_f64).sqrt());
    let bands = BandPartition::equal_energy(&lo, 3, 0.0).unwrap();
    let cx = DMatrix::from_row_slice(3, 3, &[3.6, -3.4, 0.0, -3.4, 3.6, 0.0, 0.0, 0.0, 0.5]);
    let cp = DMatrix::from_row_slice(3, 3, &[2.7, 2.5, 0.0, 2.5, 2.7, 0.0, 0.0, 0.0, 2.5]);
    let state = CovarianceState::new(cx, cp).unwrap();
    let opts = SynthOptions {
        jitter: if sigma_db > 0.0 {
            Jitter::uniform(3, sigma_db, 7)
        } else {
            Jitter::None
        },
        ..SynthOptions::default()
    };
    let bundle = synthesize(&state, &bands, &opts).unwrap();
    bundle.extract_all(&ExtremaOptions::default()).unwrap()
}

#[test]
fn resampling_is_deterministic_and_stable_in_sample_count() {
    let stats = toy_bundle_stats(0.1);
    let a = resample(&stats, &McOptions { samples: 2500, seed: 3 }).unwrap();
    let b = resample(&stats, &McOptions { samples: 2500, seed: 3 }).unwrap();
    for (ca, cb) in a.candidates.iter().zip(&b.candidates) {
        assert_eq!(ca.mean.to_bits(), cb.mean.to_bits());
        assert_eq!(ca.std.to_bits(), cb.std.to_bits());
    }
    // quadrupling the samples moves each stream mean by well under its spread
    let big = resample(&stats, &McOptions { samples: 10_000, seed: 3 }).unwrap();
    for (ca, cb) in a.candidates.iter().zip(&big.candidates) {
        assert!(ca.std > 0.0);
        assert!(
            (ca.mean - cb.mean).abs() <= 0.2 * ca.std + 1e-12,
            "stream ({:?}, {}) drifted {} against spread {}",
            ca.quadrature,
            ca.index,
            (ca.mean - cb.mean).abs(),
            ca.std
        );
        assert_relative_eq!(
            ca.robustness,
            (ca.mean - 1.0).abs() / ca.std,
            max_relative = 1e-12
        );
    }
}

#[test]
fn extracted_modes_are_orthonormal_and_sorted() {
    let stats = toy_bundle_stats(0.1);
    let set = extract_modes(
        &stats,
        &McOptions { samples: 2000, seed: 5 },
        &ExtractOptions { k_modes: 3, drop_tol: 0.2 },
    )
    .unwrap();
    assert_eq!(set.modes.len(), 3);
    for (k, m) in set.modes.iter().enumerate() {
        assert_relative_eq!(m.vector.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(m.nonclassical, m.squeezed_mean + 2.0 * m.squeezed_std < 1.0);
        assert!(m.squeezed_mean <= m.anti_mean + 1e-12);
        for other in &set.modes[..k] {
            assert!(m.vector.dot(&other.vector).abs() <= 1e-9);
        }
    }
    for w in set.modes.windows(2) {
        assert!(w[0].squeezed_mean <= w[1].squeezed_mean + 1e-12);
    }
    assert_eq!(
        set.nonclassical_count,
        set.modes.iter().filter(|m| m.nonclassical).count()
    );
}
