use crate::comb::grid::FrequencyGrid;
use crate::comb::spectra::{PhaseMatching, PumpShape};
use crate::error::Result;
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Two-photon down-conversion coupling over the comb: entry (m, n) is the
/// pump amplitude at the pair's sum detuning times the phase-matching
/// acceptance at the pair's difference detuning. Real and symmetric.
#[derive(Clone, Debug)]
pub struct CouplingKernel<T> {
    grid: FrequencyGrid<T>,
    pump: PumpShape<T>,
    pm: PhaseMatching<T>,
    matrix: DMatrix<T>,
}

impl<T: Scalar> CouplingKernel<T> {
    pub fn build(
        grid: FrequencyGrid<T>,
        pump: PumpShape<T>,
        pm: PhaseMatching<T>,
    ) -> Result<Self> {
        let n = grid.len();
        let matrix = match &pump {
            PumpShape::SingleLine => {
                // sum detuning vanishes only on the anti-diagonal
                let mut m = DMatrix::zeros(n, n);
                for r in 0..n {
                    let c = grid.mirror(r);
                    let d = grid.detuning(r) - grid.detuning(c);
                    m[(r, c)] = pm.factor(d);
                }
                m
            }
            PumpShape::Gaussian { .. } => DMatrix::from_fn(n, n, |r, c| {
                let dr = grid.detuning(r);
                let dc = grid.detuning(c);
                pump.amplitude(dr + dc) * pm.factor(dr - dc)
            }),
        };
        Ok(Self {
            grid,
            pump,
            pm,
            matrix,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn pump(&self) -> &PumpShape<T> {
        &self.pump
    }

    pub fn phase_matching(&self) -> &PhaseMatching<T> {
        &self.pm
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn is_single_line(&self) -> bool {
        matches!(self.pump, PumpShape::SingleLine)
    }
}
