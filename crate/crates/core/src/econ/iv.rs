use serde::Serialize;

use super::dist::{chi2_sf, f_sf};
use super::ols::{check_lengths, finish, is_degenerate, moments, ols_with, residuals, OlsFit, StarLevels};
use crate::error::{GovError, Result};
use crate::scalar::Real;

/// Residual-augmentation tests of regressor exogeneity. The null is that the
/// regressor is exogenous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Endogeneity<T: Real = f64> {
    pub durbin: T,
    pub durbin_p: T,
    pub wu_hausman: T,
    pub wu_hausman_p: T,
}

/// Single-instrument two-stage least squares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IvFit<T: Real = f64> {
    /// Regressor on instrument.
    pub first_stage: OlsFit<T>,
    pub partial_f: T,
    pub partial_f_p: T,
    /// Outcome on the fitted regressor, with standard errors from the
    /// structural residuals `y - b0 - b1 x`.
    pub second_stage: OlsFit<T>,
    /// `None` when the first-stage residual is collinear with the regressor,
    /// e.g. when the regressor instruments itself.
    pub endogeneity: Option<Endogeneity<T>>,
    pub adj_r2: T,
    pub n: usize,
}

pub fn two_sls<T: Real>(y: &[T], x: &[T], z: &[T]) -> Result<IvFit<T>> {
    two_sls_with(y, x, z, &StarLevels::default())
}

pub fn two_sls_with<T: Real>(y: &[T], x: &[T], z: &[T], levels: &StarLevels) -> Result<IvFit<T>> {
    check_lengths(y, x, 4)?;
    check_lengths(y, z, 4)?;
    let mz = moments(x, z);
    if is_degenerate(z, mz.sxx) {
        return Err(GovError::DegenerateInstrument);
    }
    let first_stage = ols_with(x, z, levels)?;
    let n = y.len();
    let partial_f = first_stage.t1 * first_stage.t1;
    let partial_f_p = f_sf(partial_f, 1, n - 2);

    // x_hat = a + b z has mean x_bar and centered sum of squares b^2 Szz.
    let b = first_stage.beta1;
    let sxhat = b * b * mz.sxx;
    if sxhat == T::zero() || !sxhat.is_finite() {
        return Err(GovError::DegenerateRegressor);
    }
    let szy = moments(y, z).sxy;
    let beta1 = szy / mz.sxy;
    let my = moments(y, x);
    let beta0 = my.mean_y - beta1 * my.mean_x;
    let ssr: T = residuals(y, x, beta0, beta1).map(|e| e * e).sum();
    let second_stage = finish(beta0, beta1, ssr, my.syy, sxhat, my.mean_x, n, levels);
    let endogeneity = match endogeneity_tests(y, x, z) {
        Ok(e) => Some(e),
        Err(GovError::CollinearAugmentation) => None,
        Err(e) => return Err(e),
    };
    Ok(IvFit {
        first_stage,
        partial_f,
        partial_f_p,
        adj_r2: second_stage.adj_r2,
        second_stage,
        endogeneity,
        n,
    })
}

/// Durbin (score form, chi-square(1)) and Wu-Hausman (F(1, n-3)) tests from
/// the regression of `y` on `x` augmented with the first-stage residual.
pub fn endogeneity_tests<T: Real>(y: &[T], x: &[T], z: &[T]) -> Result<Endogeneity<T>> {
    check_lengths(y, x, 4)?;
    check_lengths(y, z, 4)?;
    let first = moments(x, z);
    if is_degenerate(z, first.sxx) {
        return Err(GovError::DegenerateInstrument);
    }
    let a1 = first.sxy / first.sxx;
    let a0 = first.mean_y - a1 * first.mean_x;
    let v: Vec<T> = residuals(x, z, a0, a1).collect();

    let mx = moments(y, x);
    if is_degenerate(x, mx.sxx) {
        return Err(GovError::DegenerateRegressor);
    }
    let b1 = mx.sxy / mx.sxx;
    let b0 = mx.mean_y - b1 * mx.mean_x;
    let e_r: Vec<T> = residuals(y, x, b0, b1).collect();
    let ssr_r: T = e_r.iter().map(|&e| e * e).sum();

    // Partial v on (1, x); the drop in SSR from adding v is (w'e)^2 / w'w.
    let mv = moments(&v, x);
    let c1 = mv.sxy / mx.sxx;
    let c0 = mv.mean_y - c1 * mx.mean_x;
    let w: Vec<T> = residuals(&v, x, c0, c1).collect();
    let ww: T = w.iter().map(|&wi| wi * wi).sum();
    let vv: T = v.iter().map(|&vi| vi * vi).sum();
    let tol = T::epsilon() * T::of(1e3);
    if vv <= tol * tol * mx.sxx || ww <= tol * tol * vv {
        return Err(GovError::CollinearAugmentation);
    }
    let we: T = w.iter().zip(&e_r).map(|(&wi, &ei)| wi * ei).sum();
    let drop = (we * we / ww).min(ssr_r);
    let ssr_u = ssr_r - drop;

    let n = y.len();
    let durbin = if ssr_r > T::zero() { T::of_usize(n) * drop / ssr_r } else { T::zero() };
    let wu_hausman = if ssr_u > T::zero() {
        drop / (ssr_u / T::of_usize(n - 3))
    } else if drop > T::zero() {
        T::infinity()
    } else {
        T::zero()
    };
    Ok(Endogeneity {
        durbin,
        durbin_p: chi2_sf(durbin, 1),
        wu_hausman,
        wu_hausman_p: f_sf(wu_hausman, 1, n - 3),
    })
}
