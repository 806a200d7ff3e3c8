use crate::comb::supermode::SupermodeBasis;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Split of the local-oscillator spectrum into frequency bands of equal
/// energy, with a guard gap carved out of each band edge.
///
/// Band boundaries are energy quantiles of |lo|^2, so every pre-trim
/// interval carries total/n_bands. After trimming `gap_fraction` of a
/// band's width from each edge, a comb line belongs to the band only if its
/// whole unit-width bin fits inside the trimmed interval; straddling bins
/// fall into the gap. Bands therefore have disjoint support and their
/// normalized rows are exactly orthonormal.
#[derive(Clone, Debug)]
pub struct BandPartition<T> {
    rows: DMatrix<T>,
    powers: Vec<T>,
    bins: Vec<(usize, usize)>,
}

impl<T: Scalar> BandPartition<T> {
    pub fn equal_energy(lo: &DVector<T>, n_bands: usize, gap_fraction: T) -> Result<Self> {
        let n = lo.len();
        if n_bands == 0 || n_bands > n {
            return Err(Error::Model(format!("{n_bands} bands over {n} lines")));
        }
        if !(gap_fraction >= T::zero() && gap_fraction < T::from_f64_lit(0.5)) {
            return Err(Error::Model(format!(
                "gap fraction {} outside [0, 0.5)",
                gap_fraction.to_f64_lit()
            )));
        }
        let energy: Vec<T> = lo.iter().map(|&a| a * a).collect();
        let total: T = energy.iter().fold(T::zero(), |acc, &e| acc + e);
        if total <= T::zero() {
            return Err(Error::Model("local oscillator carries no energy".into()));
        }
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(T::zero());
        for &e in &energy {
            let last = *cum.last().expect("nonempty");
            cum.push(last + e);
        }

        let half = T::from_f64_lit(0.5);
        let bound_at = |t: T| -> T {
            let target = t * total;
            if target <= T::zero() {
                return -half;
            }
            if target >= total {
                return T::from_usize(n).expect("grid size fits scalar") - half;
            }
            let mut a = cum.partition_point(|&c| c <= target) - 1;
            while cum[a + 1] <= cum[a] {
                a += 1;
            }
            let fr = (target - cum[a]) / (cum[a + 1] - cum[a]);
            T::from_usize(a).expect("grid size fits scalar") - half + fr
        };

        let n_bands_t = T::from_usize(n_bands).expect("band count fits scalar");
        let bounds: Vec<T> = (0..=n_bands)
            .map(|i| bound_at(T::from_usize(i).expect("band count fits scalar") / n_bands_t))
            .collect();

        // equal-energy invariant on the pre-trim intervals
        let interp = |b: T| -> T {
            let pos = b + half;
            let a = pos.floor().to_f64_lit().max(0.0) as usize;
            let a = a.min(n - 1);
            cum[a] + (pos - T::from_usize(a).expect("grid size fits scalar")) * energy[a]
        };
        let share = total / n_bands_t;
        for i in 0..n_bands {
            let e = interp(bounds[i + 1]) - interp(bounds[i]);
            if (e - share).abs() > T::from_f64_lit(1e-6) * total {
                return Err(Error::Model(format!(
                    "band {i} pre-trim energy {} deviates from equal share {}",
                    e.to_f64_lit(),
                    share.to_f64_lit()
                )));
            }
        }

        // half-ulp guard so exact boundaries stay deterministic
        let eps = T::from_f64_lit(1e-9);
        let mut rows = DMatrix::zeros(n_bands, n);
        let mut powers = Vec::with_capacity(n_bands);
        let mut bins = Vec::with_capacity(n_bands);
        for i in 0..n_bands {
            let width = bounds[i + 1] - bounds[i];
            let tl = bounds[i] + gap_fraction * width;
            let th = bounds[i + 1] - gap_fraction * width;
            let mut first = n;
            let mut last = 0usize;
            let mut power = T::zero();
            for a in 0..n {
                let lo_edge = T::from_usize(a).expect("grid size fits scalar") - half;
                let hi_edge = lo_edge + T::one();
                if lo_edge >= tl - eps && hi_edge <= th + eps {
                    first = first.min(a);
                    last = a;
                    power += energy[a];
                }
            }
            if first == n {
                return Err(Error::Model(format!(
                    "band {i} owns no whole bin; widen the band or shrink the gap"
                )));
            }
            let norm = power.sqrt();
            for a in first..=last {
                rows[(i, a)] = lo[a] / norm;
            }
            powers.push(power / total);
            bins.push((first, last + 1));
        }
        Ok(Self { rows, powers, bins })
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    /// Unit-norm band measurement modes, one per row.
    pub fn rows(&self) -> &DMatrix<T> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> DVector<T> {
        self.rows.row(i).transpose()
    }

    /// Fraction of total LO energy captured by each band (not renormalized).
    pub fn powers(&self) -> &[T] {
        &self.powers
    }

    /// LO energy lost to the guard gaps.
    pub fn gap_loss(&self) -> T {
        let kept = self.powers.iter().fold(T::zero(), |acc, &p| acc + p);
        T::one() - kept
    }

    /// Half-open bin range owned by band `i`.
    pub fn bin_range(&self, i: usize) -> (usize, usize) {
        self.bins[i]
    }

    /// Overlap matrix O[i, k] = <band row i | supermode k>.
    pub fn projections(&self, basis: &SupermodeBasis<T>) -> DMatrix<T> {
        &self.rows * basis.vectors()
    }

    /// LO shape that lights bands `i` and `j` with their natural powers:
    /// the normalized restriction of the LO to the two bands. For i == j it
    /// is the band row itself.
    pub fn shape_vector(&self, i: usize, j: usize) -> DVector<T> {
        if i == j {
            return self.row(i);
        }
        let (pi, pj) = (self.powers[i], self.powers[j]);
        let wi = (pi / (pi + pj)).sqrt();
        let wj = (pj / (pi + pj)).sqrt();
        self.row(i) * wi + self.row(j) * wj
    }

    /// The same shape expressed in band coordinates (one weight per band).
    pub fn shape_weights(&self, i: usize, j: usize) -> DVector<T> {
        let mut v = DVector::zeros(self.len());
        if i == j {
            v[i] = T::one();
            return v;
        }
        let (pi, pj) = (self.powers[i], self.powers[j]);
        v[i] = (pi / (pi + pj)).sqrt();
        v[j] = (pj / (pi + pj)).sqrt();
        v
    }
}
