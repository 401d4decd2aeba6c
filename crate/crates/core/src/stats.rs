use serde::Serialize;

use crate::scalar::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Sample (n - 1) standard deviation; zero for fewer than two values.
pub fn sample_std<T: Real>(xs: &[T]) -> T {
    let n = xs.len();
    if n < 2 {
        return T::zero();
    }
    let m = mean(xs);
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / T::of_usize(n - 1)).sqrt()
}

pub fn median<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::of(2.0)
    }
}

/// Z-scores over the sample; a constant series maps to zeros.
pub fn standardize<T: Real>(xs: &[T]) -> Vec<T> {
    let m = mean(xs);
    let s = sample_std(xs);
    if s == T::zero() {
        return vec![T::zero(); xs.len()];
    }
    xs.iter().map(|&x| (x - m) / s).collect()
}

/// Mean, median, maximum, minimum and sample standard deviation of a column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SummaryStats<T: Real = f64> {
    pub n: usize,
    pub mean: T,
    pub median: T,
    pub max: T,
    pub min: T,
    pub std: T,
}

impl<T: Real> SummaryStats<T> {
    pub fn of(xs: &[T]) -> Self {
        let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
        let min = xs.iter().copied().fold(T::infinity(), T::min);
        SummaryStats {
            n: xs.len(),
            mean: mean(xs),
            median: median(xs),
            max: if xs.is_empty() { T::zero() } else { max },
            min: if xs.is_empty() { T::zero() } else { min },
            std: sample_std(xs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_summary() {
        let s: SummaryStats<f64> = SummaryStats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15_f64);
        let one = SummaryStats::of(&[10.0f32]);
        assert_eq!((one.mean, one.median, one.max, one.min, one.std), (10.0, 10.0, 10.0, 10.0, 0.0));
    }

    #[test]
    fn standardize_constant() {
        assert_eq!(standardize(&[3.0, 3.0]), vec![0.0, 0.0]);
        let z: Vec<f64> = standardize(&[1.0, 2.0, 3.0]);
        assert!((z[0] + 1.0).abs() < 1e-15 && z[1].abs() < 1e-15);
    }
}
