use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dist::t_two_sided;
use crate::error::{GovError, Result};
use crate::scalar::Real;

/// Significance thresholds for one, two and three stars, loosest first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarLevels(pub [f64; 3]);

impl Default for StarLevels {
    fn default() -> Self {
        StarLevels([0.10, 0.05, 0.01])
    }
}

impl StarLevels {
    /// Number of stars earned by `p`; a p-value equal to a threshold earns it.
    pub fn stars(&self, p: f64) -> Stars {
        if p.is_nan() {
            return Stars(0);
        }
        Stars(self.0.iter().filter(|&&level| p <= level).count() as u8)
    }

    pub fn loosest(&self) -> f64 {
        self.0[0]
    }
}

impl FromStr for StarLevels {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad significance level `{x}`")))
            .collect::<std::result::Result<_, _>>()?;
        let [a, b, c] = v[..] else {
            return Err(format!("expected three comma-separated levels, got `{s}`"));
        };
        if !(0.0 < c && c < b && b < a && a < 1.0) {
            return Err(format!("levels must be strictly decreasing inside (0, 1), got `{s}`"));
        }
        Ok(StarLevels([a, b, c]))
    }
}

impl fmt::Display for StarLevels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stars(pub u8);

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.0 {
            f.write_str("*")?;
        }
        Ok(())
    }
}

/// Univariate least-squares fit `y = beta0 + beta1 x + e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OlsFit<T: Real = f64> {
    pub beta0: T,
    pub beta1: T,
    pub se0: T,
    pub se1: T,
    pub t0: T,
    pub t1: T,
    pub p0: T,
    pub p1: T,
    pub stars: Stars,
    pub r2: T,
    pub adj_r2: T,
    pub ssr: T,
    pub n: usize,
}

pub(crate) fn check_lengths<T>(a: &[T], b: &[T], need: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(GovError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < need {
        return Err(GovError::Insufficient { have: a.len(), need });
    }
    Ok(())
}

pub(crate) struct Moments<T> {
    pub mean_x: T,
    pub mean_y: T,
    pub sxx: T,
    pub sxy: T,
    pub syy: T,
}

pub(crate) fn moments<T: Real>(y: &[T], x: &[T]) -> Moments<T> {
    let n = T::of_usize(x.len());
    let mean_x = x.iter().copied().sum::<T>() / n;
    let mean_y = y.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mean_x, yi - mean_y);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    Moments { mean_x, mean_y, sxx, sxy, syy }
}

/// True when the centered sum of squares is indistinguishable from rounding noise.
pub(crate) fn is_degenerate<T: Real>(xs: &[T], centered_ss: T) -> bool {
    if xs.iter().all(|&v| v == xs[0]) {
        return true;
    }
    let raw: T = xs.iter().map(|&v| v * v).sum();
    let tol = T::epsilon() * T::of_usize(xs.len());
    centered_ss <= tol * tol * raw
}

/// Ratio `num / se`, taking 0/0 as 0 and x/0 as a signed infinity.
pub(crate) fn t_ratio<T: Real>(num: T, se: T) -> T {
    if se == T::zero() {
        if num == T::zero() {
            T::zero()
        } else {
            num.signum() * T::infinity()
        }
    } else {
        num / se
    }
}

/// Assembles a fit from coefficients, the residual sum of squares, the
/// regressor's centered sum of squares and its mean.
pub(crate) fn finish<T: Real>(
    beta0: T,
    beta1: T,
    ssr: T,
    sst: T,
    sxx: T,
    mean_x: T,
    n: usize,
    levels: &StarLevels,
) -> OlsFit<T> {
    let nt = T::of_usize(n);
    let dof = n - 2;
    let sigma2 = ssr / T::of_usize(dof);
    let se1 = (sigma2 / sxx).sqrt();
    let se0 = (sigma2 * (T::one() / nt + mean_x * mean_x / sxx)).sqrt();
    let t0 = t_ratio(beta0, se0);
    let t1 = t_ratio(beta1, se1);
    let p0 = t_two_sided(t0, dof);
    let p1 = t_two_sided(t1, dof);
    let r2 = if sst > T::zero() { T::one() - ssr / sst } else { T::zero() };
    let adj_r2 = T::one() - (T::one() - r2) * T::of_usize(n - 1) / T::of_usize(dof);
    OlsFit {
        beta0,
        beta1,
        se0,
        se1,
        t0,
        t1,
        p0,
        p1,
        stars: levels.stars(p1.as_f64()),
        r2,
        adj_r2,
        ssr,
        n,
    }
}

/// Least squares with intercept and classical standard errors.
pub fn ols<T: Real>(y: &[T], x: &[T]) -> Result<OlsFit<T>> {
    ols_with(y, x, &StarLevels::default())
}

pub fn ols_with<T: Real>(y: &[T], x: &[T], levels: &StarLevels) -> Result<OlsFit<T>> {
    check_lengths(y, x, 3)?;
    let m = moments(y, x);
    if is_degenerate(x, m.sxx) {
        return Err(GovError::DegenerateRegressor);
    }
    let beta1 = m.sxy / m.sxx;
    let beta0 = m.mean_y - beta1 * m.mean_x;
    let ssr: T = residuals(y, x, beta0, beta1).map(|e| e * e).sum();
    Ok(finish(beta0, beta1, ssr, m.syy, m.sxx, m.mean_x, x.len(), levels))
}

pub(crate) fn residuals<'a, T: Real>(y: &'a [T], x: &'a [T], b0: T, b1: T) -> impl Iterator<Item = T> + 'a {
    y.iter().zip(x).map(move |(&yi, &xi)| yi - b0 - b1 * xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0_f64, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f: OlsFit<f64> = ols(&y, &x).unwrap();
        assert!((f.beta1 - 2.0).abs() < 1e-14 && (f.beta0 - 1.0).abs() < 1e-14);
        assert_eq!(f.r2, 1.0);
        assert_eq!(f.stars, Stars(3));
    }

    #[test]
    fn constant_y() {
        let f = ols(&[-3.0; 4], &[1.0, 2.0, 3.0, 5.0]).unwrap();
        assert_eq!((f.beta0, f.beta1), (-3.0, 0.0));
        assert_eq!(f.t1, 0.0);
        assert_eq!(f.p1, 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(ols(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]), Err(GovError::DegenerateRegressor)));
        assert!(matches!(ols(&[1.0, 2.0], &[1.0, 2.0]), Err(GovError::Insufficient { have: 2, need: 3 })));
        assert!(matches!(ols(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(GovError::LengthMismatch(..))));
    }

    #[test]
    fn textbook_numbers() {
        // Reference values from statsmodels OLS on the same sample.
        let x = [1.0_f64, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 5.0, 4.0, 5.0];
        let f: OlsFit<f64> = ols(&y, &x).unwrap();
        assert!((f.beta1 - 0.6).abs() < 1e-12);
        assert!((f.beta0 - 2.2).abs() < 1e-12);
        assert!((f.se1 - 0.28284271247461895).abs() < 1e-12);
        assert!((f.se0 - 0.9380831519646853).abs() < 1e-12);
        assert!((f.p1 - 0.12402706265755457).abs() < 1e-10);
        assert!((f.p0 - 0.10074345608541986).abs() < 1e-10);
        assert!((f.r2 - 0.6).abs() < 1e-12);
        assert!((f.adj_r2 - 0.4666666666666668).abs() < 1e-12);
    }

    #[test]
    fn star_thresholds() {
        let l = StarLevels::default();
        assert_eq!(l.stars(0.2), Stars(0));
        assert_eq!(l.stars(0.10), Stars(1));
        assert_eq!(l.stars(0.07), Stars(1));
        assert_eq!(l.stars(0.05), Stars(2));
        assert_eq!(l.stars(0.001), Stars(3));
        assert_eq!(Stars(2).to_string(), "**");
        assert_eq!("0.1,0.05,0.01".parse::<StarLevels>().unwrap(), l);
        assert!("0.05,0.1,0.01".parse::<StarLevels>().is_err());
    }
}
