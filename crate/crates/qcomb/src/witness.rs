//! Entanglement witnesses over bipartitions of the band modes.
//!
//! A bipartition is a bitmask over mode indices: set bits form side A.
//! Collective quadratures weight each member mode by 1/sqrt(|side|).

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::covariance::{min_symplectic_pair, CovarianceState};
use nalgebra::{DMatrix, DVector};

fn side_vector<T: Scalar>(n: usize, mask: u32, member: bool) -> DVector<T> {
    let count = (0..n)
        .filter(|i| ((mask >> i) & 1 == 1) == member)
        .count();
    let w = T::one() / T::from_usize(count.max(1)).expect("mode count fits scalar").sqrt();
    DVector::from_fn(n, |i, _| {
        if ((mask >> i) & 1 == 1) == member {
            w
        } else {
            T::zero()
        }
    })
}

fn check_mask<T: Scalar>(state: &CovarianceState<T>, mask: u32) -> Result<()> {
    let n = state.n();
    if n == 0 || n > 31 {
        return Err(Error::Model(format!("witnesses support 1..=31 modes, got {n}")));
    }
    let full = (1u32 << n) - 1;
    if mask == 0 || mask & full == 0 || mask & full == full || mask & !full != 0 {
        return Err(Error::Model(format!(
            "mask {mask:#b} is not a proper bipartition of {n} modes"
        )));
    }
    Ok(())
}

/// Sum criterion: Var((xA + xB)/sqrt(2)) + Var((pA - pB)/sqrt(2)).
/// Vacuum gives 2; any value below 2 certifies entanglement.
pub fn duan<T: Scalar>(state: &CovarianceState<T>, mask: u32) -> Result<T> {
    check_mask(state, mask)?;
    let a = side_vector(state.n(), mask, true);
    let b = side_vector(state.n(), mask, false);
    let half = T::from_f64_lit(0.5).sqrt();
    let plus = (&a + &b) * half;
    let minus = (&a - &b) * half;
    Ok(state.x_variance(&plus) + state.p_variance(&minus))
}

/// Product of conditional variances of the collective quadratures:
/// [Var(xA) - Cov(xA, xB)^2 / Var(xB)] * [same in p]. Vacuum gives 1;
/// below 1 certifies entanglement (stricter than the sum criterion).
pub fn epr<T: Scalar>(state: &CovarianceState<T>, mask: u32) -> Result<T> {
    check_mask(state, mask)?;
    let a = side_vector(state.n(), mask, true);
    let b = side_vector(state.n(), mask, false);
    let conditional = |c: &DMatrix<T>| {
        let vaa = (a.transpose() * c * &a)[(0, 0)];
        let vbb = (b.transpose() * c * &b)[(0, 0)];
        let vab = (a.transpose() * c * &b)[(0, 0)];
        vaa - vab * vab / vbb
    };
    Ok(conditional(state.cx()) * conditional(state.cp()))
}

/// Smallest symplectic eigenvalue after partial transposition of side B
/// (p -> -p on B). Below 1 the state has no separable description across
/// the cut; at or above 1 the two sides are PPT.
pub fn ppt_nu_min<T: Scalar>(state: &CovarianceState<T>, mask: u32) -> Result<T> {
    check_mask(state, mask)?;
    let n = state.n();
    let flip = DVector::from_fn(n, |i, _| {
        if (mask >> i) & 1 == 1 {
            T::one()
        } else {
            -T::one()
        }
    });
    let cp = DMatrix::from_fn(n, n, |i, j| flip[i] * state.cp()[(i, j)] * flip[j]);
    Ok(min_symplectic_pair(state.cx(), &cp))
}

/// Witness values for one bipartition.
#[derive(Clone, Copy, Debug)]
pub struct ScanEntry<T> {
    /// Set bits = side A; bit 0 is always set.
    pub mask: u32,
    pub duan: T,
    pub epr: T,
    pub nu_min: T,
}

/// Statistics of a full bipartition scan.
#[derive(Clone, Copy, Debug)]
pub struct ScanSummary {
    pub bipartitions: usize,
    pub ppt_entangled: usize,
    pub epr_entangled: usize,
    pub duan_entangled: usize,
}

/// Evaluates all three witnesses on every bipartition, canonicalized so
/// that mode 0 sits in side A. Entries come back sorted by the EPR product,
/// strongest first.
pub fn scan<T: Scalar>(state: &CovarianceState<T>) -> Result<Vec<ScanEntry<T>>> {
    let n = state.n();
    if n < 2 || n > 16 {
        return Err(Error::Model(format!(
            "bipartition scan supports 2..=16 modes, got {n}"
        )));
    }
    let half_masks = 1u32 << (n - 1);
    let mut entries = Vec::with_capacity(half_masks as usize - 1);
    for h in 0..half_masks - 1 {
        let mask = (h << 1) | 1;
        entries.push(ScanEntry {
            mask,
            duan: duan(state, mask)?,
            epr: epr(state, mask)?,
            nu_min: ppt_nu_min(state, mask)?,
        });
    }
    entries.sort_by(|a, b| a.epr.partial_cmp(&b.epr).expect("finite witness values"));
    Ok(entries)
}

pub fn summarize<T: Scalar>(entries: &[ScanEntry<T>]) -> ScanSummary {
    let tol = T::from_f64_lit(1e-9);
    ScanSummary {
        bipartitions: entries.len(),
        ppt_entangled: entries
            .iter()
            .filter(|e| e.nu_min < T::one() - tol)
            .count(),
        epr_entangled: entries.iter().filter(|e| e.epr < T::one()).count(),
        duan_entangled: entries
            .iter()
            .filter(|e| e.duan < T::from_f64_lit(2.0))
            .count(),
    }
}
