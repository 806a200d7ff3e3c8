use crate::comb::coupling::CouplingKernel;
use crate::comb::grid::FrequencyGrid;
use crate::comb::hermite::hermite_gauss_vector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Leading eigenmodes of the coupling kernel, ordered by decreasing
/// eigenvalue magnitude. Columns of `vectors` are unit-norm; `values` keep
/// their signs, which decide the squeezed quadrature downstream.
#[derive(Clone, Debug)]
pub struct SupermodeBasis<T> {
    grid: FrequencyGrid<T>,
    vectors: DMatrix<T>,
    values: DVector<T>,
}

impl<T: Scalar> SupermodeBasis<T> {
    /// Diagonalizes the kernel and keeps the `k_modes` strongest modes.
    ///
    /// A single-line pump couples the comb line pairs (m, -m) independently,
    /// so that case is solved exactly: eigenvectors (e_m +/- e_-m)/sqrt(2)
    /// with eigenvalues +/- the pair coupling. The dense path runs a
    /// self-adjoint eigendecomposition in f64, whatever T is, and every
    /// kept eigenpair is residual-checked.
    pub fn solve(kernel: &CouplingKernel<T>, k_modes: usize) -> Result<Self> {
        let grid = kernel.grid().clone();
        let n = grid.len();
        if k_modes == 0 || k_modes > n {
            return Err(Error::Model(format!(
                "requested {k_modes} modes from a {n}-line grid"
            )));
        }
        let (values, mut vectors): (Vec<T>, Vec<DVector<T>>) = if kernel.is_single_line() {
            let m = kernel.matrix();
            let c = grid.center_index();
            let mut vals = vec![T::one()];
            let mut vecs = vec![DVector::from_fn(n, |i, _| {
                if i == c {
                    T::one()
                } else {
                    T::zero()
                }
            })];
            let inv_sqrt2 = T::one() / T::from_f64_lit(2.0).sqrt();
            for off in 1..=c {
                let hi = c + off;
                let lo = c - off;
                let f = m[(hi, lo)];
                for sign in [T::one(), -T::one()] {
                    let mut v = DVector::zeros(n);
                    v[hi] = inv_sqrt2;
                    v[lo] = sign * inv_sqrt2;
                    vals.push(sign * f);
                    vecs.push(v);
                }
            }
            (vals, vecs)
        } else {
            // the dense solve runs in f64 regardless of T
            let m = kernel.matrix();
            let a = faer::Mat::<f64>::from_fn(n, n, |r, c| m[(r, c)].to_f64_lit());
            let evd = a
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::Model(format!("dense eigensolve failed: {e:?}")))?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let vals: Vec<T> = (0..n).map(|j| T::from_f64_lit(s[j])).collect();
            let vecs: Vec<DVector<T>> = (0..n)
                .map(|j| DVector::from_fn(n, |i, _| T::from_f64_lit(u[(i, j)])))
                .collect();
            (vals, vecs)
        };

        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| {
            values[b]
                .abs()
                .partial_cmp(&values[a].abs())
                .expect("finite eigenvalues")
        });
        order.truncate(k_modes);
        let values_sorted = DVector::from_fn(k_modes, |k, _| values[order[k]]);
        let mut mat = DMatrix::zeros(n, k_modes);
        for (k, &idx) in order.iter().enumerate() {
            let mut col = std::mem::take(&mut vectors[idx]);
            fix_sign(&mut col);
            mat.set_column(k, &col);
        }
        // kept modes must be true eigenpairs; a silently inaccurate solve
        // would corrupt every covariance built on top of them
        let scale = values_sorted[0].abs();
        for k in 0..k_modes {
            let u = mat.column(k).into_owned();
            let resid = (kernel.matrix() * &u - &u * values_sorted[k]).norm();
            if resid > T::from_f64_lit(1e-8) * scale {
                return Err(Error::Model(format!(
                    "eigenpair {k} residual {:.3e} exceeds 1e-8 of the leading eigenvalue",
                    resid.to_f64_lit()
                )));
            }
        }
        Ok(Self { grid, vectors: mat, values: values_sorted })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> DVector<T> {
        self.vectors.column(k).into_owned()
    }

    /// |overlap| with the order-`k` Hermite-Gauss profile of scale `std_hz`.
    pub fn hermite_overlap(&self, k: usize, std_hz: T) -> T {
        let reference = hermite_gauss_vector(&self.grid, k, std_hz);
        self.vectors.column(k).dot(&reference).abs()
    }

    /// Standard deviation of the mode's intensity profile, in Hz.
    pub fn intensity_std(&self, k: usize) -> T {
        let col = self.vectors.column(k);
        let mut mass = T::zero();
        let mut mean = T::zero();
        for i in 0..self.grid.len() {
            let w = col[i] * col[i];
            mass += w;
            mean += w * self.grid.detuning(i);
        }
        mean /= mass;
        let mut var = T::zero();
        for i in 0..self.grid.len() {
            let w = col[i] * col[i];
            let d = self.grid.detuning(i) - mean;
            var += w * d * d;
        }
        (var / mass).sqrt()
    }
}

/// Deterministic orientation: the largest-magnitude component is positive.
pub(crate) fn fix_sign<T: Scalar>(v: &mut DVector<T>) {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        v.neg_mut();
    }
}
