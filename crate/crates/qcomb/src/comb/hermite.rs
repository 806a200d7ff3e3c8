use crate::comb::grid::FrequencyGrid;
use crate::scalar::Scalar;
use nalgebra::DVector;

/// Unit-norm Hermite-Gauss profile of order `k` on the grid, centered on the
/// carrier, with amplitude scale `std_hz`. Uses the normalized three-term
/// recurrence so high orders neither overflow nor underflow.
pub fn hermite_gauss_vector<T: Scalar>(
    grid: &FrequencyGrid<T>,
    k: usize,
    std_hz: T,
) -> DVector<T> {
    let n = grid.len();
    let two = T::from_f64_lit(2.0);
    let mut prev = DVector::<T>::zeros(n);
    let mut cur = DVector::from_fn(n, |i, _| {
        let xi = grid.detuning(i) / std_hz;
        (-xi * xi / two).exp()
    });
    for m in 0..k {
        let a = (two / T::from_usize(m + 1).unwrap()).sqrt();
        let b = (T::from_usize(m).unwrap() / T::from_usize(m + 1).unwrap()).sqrt();
        let next = DVector::from_fn(n, |i, _| {
            let xi = grid.detuning(i) / std_hz;
            a * xi * cur[i] - b * prev[i]
        });
        prev = cur;
        cur = next;
    }
    let norm = cur.norm();
    cur / norm
}
