use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DVector;

/// Uniform frequency comb: `n` lines spaced by the free spectral range,
/// symmetric about the carrier. `n` is odd so the carrier is a grid line.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    center_hz: T,
    fsr_hz: T,
    n: usize,
}

impl<T: Scalar> FrequencyGrid<T> {
    pub fn new(center_hz: T, fsr_hz: T, n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::Model(format!(
                "grid needs an odd number of lines >= 3, got {n}"
            )));
        }
        if !(fsr_hz > T::zero()) {
            return Err(Error::Model("free spectral range must be positive".into()));
        }
        if !(center_hz > T::zero()) {
            return Err(Error::Model("carrier frequency must be positive".into()));
        }
        Ok(Self { center_hz, fsr_hz, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center_hz(&self) -> T {
        self.center_hz
    }

    pub fn fsr_hz(&self) -> T {
        self.fsr_hz
    }

    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    /// Signed offset of line `i` from the carrier, in Hz.
    pub fn detuning(&self, i: usize) -> T {
        debug_assert!(i < self.n);
        let k = i as i64 - (self.n / 2) as i64;
        T::from_i64(k).unwrap() * self.fsr_hz
    }

    pub fn frequency(&self, i: usize) -> T {
        self.center_hz + self.detuning(i)
    }

    pub fn detunings(&self) -> DVector<T> {
        DVector::from_fn(self.n, |i, _| self.detuning(i))
    }

    /// Index of the line mirrored through the carrier.
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }
}
