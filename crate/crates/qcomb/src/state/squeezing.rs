use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::covariance::CovarianceState;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Which quadrature of a mode sits below shot noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    pub fn flipped(self) -> Self {
        match self {
            Quadrature::X => Quadrature::P,
            Quadrature::P => Quadrature::X,
        }
    }
}

/// Squeezed and antisqueezed variances of one supermode, in shot-noise
/// units, after detection loss.
#[derive(Clone, Copy, Debug)]
pub struct ModeSqueezing<T> {
    pub v_minus: T,
    pub v_plus: T,
    pub quadrature: Quadrature,
}

impl<T: Scalar> ModeSqueezing<T> {
    /// Variance of the x quadrature of this mode.
    pub fn vx(&self) -> T {
        match self.quadrature {
            Quadrature::X => self.v_minus,
            Quadrature::P => self.v_plus,
        }
    }

    pub fn vp(&self) -> T {
        match self.quadrature {
            Quadrature::X => self.v_plus,
            Quadrature::P => self.v_minus,
        }
    }
}

/// Per-supermode squeezing levels derived from the kernel eigenvalues.
#[derive(Clone, Debug)]
pub struct SqueezingSpectrum<T> {
    modes: Vec<ModeSqueezing<T>>,
}

impl<T: Scalar> SqueezingSpectrum<T> {
    /// Mode k squeezes by sigma_k = |v_k / v_0| * pump_ratio:
    /// V-/+ = ((1 -/+ sigma)/(1 +/- sigma))^2, then detection loss
    /// V -> eta V + 1 - eta. A positive eigenvalue squeezes x.
    pub fn from_eigenvalues(values: &DVector<T>, pump_ratio: T, efficiency: T) -> Result<Self> {
        if !(pump_ratio >= T::zero()) || !(pump_ratio < T::one()) {
            return Err(Error::AboveThreshold(pump_ratio.to_f64_lit()));
        }
        if !(efficiency > T::zero() && efficiency <= T::one()) {
            return Err(Error::Model(format!(
                "efficiency {} outside (0, 1]",
                efficiency.to_f64_lit()
            )));
        }
        if values.len() == 0 {
            return Err(Error::Model("no eigenvalues".into()));
        }
        let lead = values[0].abs();
        if lead <= T::zero() {
            return Err(Error::Model("leading eigenvalue is zero".into()));
        }
        let modes = values
            .iter()
            .map(|&v| {
                let sigma = v.abs() / lead * pump_ratio;
                let v_minus = ((T::one() - sigma) / (T::one() + sigma)).powi(2);
                let v_plus = ((T::one() + sigma) / (T::one() - sigma)).powi(2);
                ModeSqueezing {
                    v_minus: efficiency * v_minus + T::one() - efficiency,
                    v_plus: efficiency * v_plus + T::one() - efficiency,
                    quadrature: if v >= T::zero() {
                        Quadrature::X
                    } else {
                        Quadrature::P
                    },
                }
            })
            .collect();
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[ModeSqueezing<T>] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Covariance of the band measurement modes given their overlaps with
    /// the supermodes: C = I + O diag(V - 1) O^T per quadrature. Modes
    /// outside the kept basis contribute vacuum.
    pub fn band_state(&self, projections: &DMatrix<T>) -> Result<CovarianceState<T>> {
        if projections.ncols() != self.modes.len() {
            return Err(Error::Model(format!(
                "{} overlap columns for {} modes",
                projections.ncols(),
                self.modes.len()
            )));
        }
        let k = projections.nrows();
        let build = |pick: &dyn Fn(&ModeSqueezing<T>) -> T| {
            let mut c = DMatrix::identity(k, k);
            for (m, mode) in self.modes.iter().enumerate() {
                let col = projections.column(m);
                c.ger(pick(mode) - T::one(), &col, &col, T::one());
            }
            c
        };
        CovarianceState::new(build(&ModeSqueezing::vx), build(&ModeSqueezing::vp))
    }
}

/// Recovers (pump_ratio, efficiency) from a measured squeezed/antisqueezed
/// variance pair of the leading mode, in dB. The intrinsic squeezed
/// variance solves v- = eta vi + 1 - eta, v+ = eta / vi + 1 - eta.
pub fn calibrate<T: Scalar>(v_minus_db: T, v_plus_db: T) -> Result<(T, T)> {
    if !(v_minus_db < T::zero()) || !(v_plus_db > T::zero()) {
        return Err(Error::Model(
            "calibration needs v_minus_db < 0 < v_plus_db".into(),
        ));
    }
    let ten = T::from_f64_lit(10.0);
    let v_minus = ten.powf(v_minus_db / ten);
    let v_plus = ten.powf(v_plus_db / ten);
    let vi_minus = (T::one() - v_minus) / (v_plus - T::one());
    if !(vi_minus > T::zero() && vi_minus < T::one()) {
        return Err(Error::Model(format!(
            "implied intrinsic variance {} outside (0, 1)",
            vi_minus.to_f64_lit()
        )));
    }
    let eta = (T::one() - v_minus) / (T::one() - vi_minus);
    if eta > T::one() {
        return Err(Error::Model(format!(
            "variance pair implies efficiency {} > 1",
            eta.to_f64_lit()
        )));
    }
    let root = vi_minus.sqrt();
    let sigma = (T::one() - root) / (T::one() + root);
    Ok((sigma, eta))
}
