use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Quadrature covariance of an n-mode Gaussian state with no x-p
/// cross-correlations, stored as the two diagonal blocks. Vacuum is the
/// identity in both blocks (shot-noise units).
#[derive(Clone, Debug)]
pub struct CovarianceState<T> {
    cx: DMatrix<T>,
    cp: DMatrix<T>,
}

impl<T: Scalar> CovarianceState<T> {
    /// Validates shape, symmetry, and positive definiteness of both blocks,
    /// then stores the symmetrized matrices.
    pub fn new(cx: DMatrix<T>, cp: DMatrix<T>) -> Result<Self> {
        if !cx.is_square() || !cp.is_square() || cx.nrows() != cp.nrows() {
            return Err(Error::Model(format!(
                "covariance blocks must be square and equal-sized, got {}x{} and {}x{}",
                cx.nrows(),
                cx.ncols(),
                cp.nrows(),
                cp.ncols()
            )));
        }
        let cx = symmetrized(cx, "x")?;
        let cp = symmetrized(cp, "p")?;
        if Cholesky::new(cx.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("x quadrature block".into()));
        }
        if Cholesky::new(cp.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("p quadrature block".into()));
        }
        Ok(Self { cx, cp })
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            cx: DMatrix::identity(n, n),
            cp: DMatrix::identity(n, n),
        }
    }

    /// State with covariance I + U diag(d - 1) U^T per quadrature, for a set
    /// of orthonormal mode columns U. With square U this is U diag(d) U^T;
    /// with fewer columns the complement stays at vacuum.
    pub fn from_modes(u: &DMatrix<T>, dx: &DVector<T>, dp: &DVector<T>) -> Result<Self> {
        let m = u.ncols();
        if dx.len() != m || dp.len() != m {
            return Err(Error::Model(format!(
                "{m} mode columns need {m} variances per quadrature, got {} and {}",
                dx.len(),
                dp.len()
            )));
        }
        let block = |d: &DVector<T>| {
            let mut c = DMatrix::identity(u.nrows(), u.nrows());
            for k in 0..m {
                let col = u.column(k);
                c.ger(d[k] - T::one(), &col, &col, T::one());
            }
            c
        };
        Self::new(block(dx), block(dp))
    }

    pub fn n(&self) -> usize {
        self.cx.nrows()
    }

    pub fn cx(&self) -> &DMatrix<T> {
        &self.cx
    }

    pub fn cp(&self) -> &DMatrix<T> {
        &self.cp
    }

    /// Variance of the collective x quadrature along the mode vector `u`.
    pub fn x_variance(&self, u: &DVector<T>) -> T {
        (u.transpose() * &self.cx * u)[(0, 0)]
    }

    pub fn p_variance(&self, u: &DVector<T>) -> T {
        (u.transpose() * &self.cp * u)[(0, 0)]
    }

    /// Tr purity = 1/sqrt(det Cx det Cp); 1 for pure states.
    pub fn purity(&self) -> T {
        let half_det = |m: &DMatrix<T>| {
            let chol = Cholesky::new(m.clone()).expect("blocks validated positive definite");
            let l = chol.l();
            let mut p = T::one();
            for i in 0..m.nrows() {
                p *= l[(i, i)];
            }
            p
        };
        T::one() / (half_det(&self.cx) * half_det(&self.cp))
    }

    /// Largest entry (in magnitude) of Cx Cp - Cp Cx. Zero iff the two
    /// blocks share an eigenbasis, as they do for ideal mode-diagonal states.
    pub fn commutator_max(&self) -> T {
        let comm = &self.cx * &self.cp - &self.cp * &self.cx;
        comm.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Same detection efficiency on every mode: C -> eta C + (1 - eta) I.
    pub fn apply_loss_uniform(&self, eta: T) -> Result<Self> {
        self.apply_loss(&vec![eta; self.n()])
    }

    /// Per-mode efficiencies: C -> sqrt(D) C sqrt(D) + (I - D).
    pub fn apply_loss(&self, etas: &[T]) -> Result<Self> {
        if etas.len() != self.n() {
            return Err(Error::Model(format!(
                "{} efficiencies for {} modes",
                etas.len(),
                self.n()
            )));
        }
        for &e in etas {
            if !(e > T::zero() && e <= T::one()) {
                return Err(Error::Model(format!(
                    "efficiency {} outside (0, 1]",
                    e.to_f64_lit()
                )));
            }
        }
        let root: Vec<T> = etas.iter().map(|&e| e.sqrt()).collect();
        let damp = |m: &DMatrix<T>| {
            DMatrix::from_fn(self.n(), self.n(), |i, j| {
                let mut v = root[i] * m[(i, j)] * root[j];
                if i == j {
                    v += T::one() - etas[i];
                }
                v
            })
        };
        Self::new(damp(&self.cx), damp(&self.cp))
    }

    /// Smallest symplectic eigenvalue of the full state.
    pub fn min_symplectic(&self) -> T {
        min_symplectic_pair(&self.cx, &self.cp)
    }

    /// Physicality gate: every symplectic eigenvalue must reach shot noise.
    pub fn validated(self, tol: T) -> Result<Self> {
        let nu = self.min_symplectic();
        if nu < T::one() - tol {
            return Err(Error::Unphysical {
                nu_min: nu.to_f64_lit(),
            });
        }
        Ok(self)
    }
}

/// Smallest symplectic eigenvalue of the block pair (Cx, Cp): the square
/// root of the smallest eigenvalue of Cx Cp, computed symmetrically as
/// L^T Cp L with L the Cholesky factor of Cx.
pub fn min_symplectic_pair<T: Scalar>(cx: &DMatrix<T>, cp: &DMatrix<T>) -> T {
    let chol = Cholesky::new(cx.clone()).expect("x block positive definite");
    let l = chol.l();
    let m = l.transpose() * cp * &l;
    let sym = (&m + m.transpose()).scale(T::from_f64_lit(0.5));
    let eig = sym.symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .fold(T::max_value().expect("bounded scalar"), |acc, &v| acc.min(v));
    min.max(T::zero()).sqrt()
}

fn symmetrized<T: Scalar>(m: DMatrix<T>, label: &str) -> Result<DMatrix<T>> {
    let scale = m.iter().fold(T::one(), |acc, &v| acc.max(v.abs()));
    let tol = scale * T::from_f64_lit(1e-9);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::Model(format!(
                    "{label} block asymmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mt = m.transpose();
    Ok((m + mt).scale(T::from_f64_lit(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_is_pure_and_physical() {
        let v = CovarianceState::<f64>::vacuum(4);
        assert_relative_eq!(v.purity(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(v.min_symplectic(), 1.0, epsilon = 1e-12);
        assert_eq!(v.commutator_max(), 0.0);
    }

    #[test]
    fn diagonal_squeezed_state_loss_formula() {
        let cx = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 4.0]));
        let cp = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 0.25]));
        let s = CovarianceState::new(cx, cp).unwrap();
        assert_relative_eq!(s.purity(), 1.0, epsilon = 1e-12);
        let eta = 0.7;
        let lossy = s.apply_loss_uniform(eta).unwrap();
        assert_relative_eq!(lossy.cx()[(0, 0)], eta * 0.25 + (1.0 - eta), epsilon = 1e-14);
        assert_relative_eq!(lossy.cp()[(1, 1)], eta * 0.25 + (1.0 - eta), epsilon = 1e-14);
        assert!(lossy.purity() < 1.0);
        assert!(lossy.min_symplectic() > s.min_symplectic());
        assert!(lossy.clone().validated(1e-9).is_ok());
    }

    #[test]
    fn asymmetric_block_rejected() {
        let mut cx = DMatrix::<f64>::identity(2, 2);
        cx[(0, 1)] = 0.3;
        let err = CovarianceState::new(cx, DMatrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
    }

    #[test]
    fn indefinite_block_rejected() {
        let cx = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        let err = CovarianceState::new(cx, DMatrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(_)));
    }

    #[test]
    fn below_shot_noise_symplectic_flagged() {
        // both quadratures squeezed at once is unphysical
        let cx = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5]));
        let cp = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5]));
        let s = CovarianceState::new(cx, cp).unwrap();
        match s.validated(1e-9).unwrap_err() {
            Error::Unphysical { nu_min } => assert_relative_eq!(nu_min, 0.5, epsilon = 1e-12),
            other => panic!("expected unphysical, got {other}"),
        }
    }

    #[test]
    fn from_modes_rotated_state_matches_direct_product() {
        let r = 0.5_f64.sqrt();
        let u = DMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
        let (a, b) = (0.3, 1.0 / 0.3);
        let s = CovarianceState::from_modes(
            &u,
            &DVector::from_vec(vec![a, b]),
            &DVector::from_vec(vec![b, a]),
        )
        .unwrap();
        assert_relative_eq!(s.purity(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.cx()[(0, 0)], (a + b) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.cx()[(0, 1)], (a - b) / 2.0, epsilon = 1e-12);
        let e = DVector::from_vec(vec![1.0, 0.0]);
        assert_relative_eq!(s.x_variance(&e), (a + b) / 2.0, epsilon = 1e-12);
    }
}
