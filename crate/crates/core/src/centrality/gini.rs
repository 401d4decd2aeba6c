use std::collections::BTreeMap;
use std::str::FromStr;

use num_traits::{Num, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{GovError, Result};
use crate::govdata::{Address, Amount, FinalBallot};
use crate::scalar::Real;

/// Upper clip for the tail-index Gini (which would otherwise reach 1 or exceed it).
pub const GINI_CEILING_EPS: f64 = 1e-9;

/// Gini coefficient as the mean absolute pairwise difference,
/// `Σᵢ Σⱼ |vᵢ − vⱼ| / (2 n² v̄)`.
///
/// Generic over any signed field so it can be evaluated exactly on
/// rationals. Fewer than two values or a zero total yield zero.
pub fn gini_pairwise<T>(weights: &[T]) -> T
where
    T: Num + Signed + PartialOrd + Copy,
{
    let n = weights.iter().fold(T::zero(), |acc, _| acc + T::one());
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if weights.len() < 2 || total == T::zero() {
        return T::zero();
    }
    let mut diff = T::zero();
    for &a in weights {
        for &b in weights {
            diff = diff + (a - b).abs();
        }
    }
    // 2 n² v̄ = 2 n Σv
    diff / ((n + n) * total)
}

/// Poll-level Gini over final ballot weights.
pub fn poll_gini<T: Real + Signed>(ballots: &[FinalBallot]) -> T {
    // sorted first so the float sum does not depend on ballot order
    let mut amounts: Vec<_> = ballots.iter().map(|b| b.weight).collect();
    amounts.sort_unstable();
    let w: Vec<T> = amounts.into_iter().map(|a| a.to_real()).collect();
    gini_pairwise(&w)
}

/// Paretian maximum-likelihood tail index `n / Σ ln(xᵢ / x_min)` over the
/// positive values, with `x_min` the smallest of them. `None` when fewer than
/// two positive values exist or all are equal (the index diverges).
pub fn pareto_tail_index<T: Real>(values: &[T]) -> Option<T> {
    let pos: Vec<T> = values.iter().copied().filter(|&v| v > T::zero()).collect();
    if pos.len() < 2 {
        return None;
    }
    let x_min = pos.iter().copied().fold(T::infinity(), T::min);
    let log_sum: T = pos.iter().map(|&x| (x / x_min).ln()).sum();
    if log_sum <= T::zero() {
        return None;
    }
    Some(T::of_usize(pos.len()) / log_sum)
}

/// Gini implied by a fitted Pareto tail, `1 / (2α̂ − 1)`, clipped to `[0, 1)`.
pub fn mle_gini<T: Real>(values: &[T]) -> T {
    let ceiling = T::one() - T::of(GINI_CEILING_EPS);
    match pareto_tail_index(values) {
        None => T::zero(),
        Some(alpha) => {
            let denom = alpha + alpha - T::one();
            if denom <= T::zero() {
                return ceiling;
            }
            (T::one() / denom).max(T::zero()).min(ceiling)
        }
    }
}

/// How the daily Gini is formed from the day's polls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DailyGiniMode {
    /// Tail-index fit on each voter's votes summed over the day.
    #[default]
    Mle,
    /// Average of the day's poll-level Gini values.
    MeanOfPolls,
    /// Pairwise Gini on each voter's votes summed over the day.
    PooledSample,
}

impl FromStr for DailyGiniMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mle" => Ok(DailyGiniMode::Mle),
            "mean_of_polls" | "mean-of-polls" => Ok(DailyGiniMode::MeanOfPolls),
            "pooled_sample" | "pooled-sample" => Ok(DailyGiniMode::PooledSample),
            _ => Err(format!("unknown daily gini mode `{s}` (expected mle|mean_of_polls|pooled_sample)")),
        }
    }
}

/// Each voter's summed votes across a set of polls, in address order.
pub fn voter_day_totals<'a>(polls: impl IntoIterator<Item = &'a [FinalBallot]>) -> Vec<Amount> {
    let mut totals: BTreeMap<&Address, Amount> = BTreeMap::new();
    for ballots in polls {
        for b in ballots {
            *totals.entry(&b.voter).or_default() += b.weight;
        }
    }
    totals.into_values().collect()
}

/// Daily Gini over all ballots of the polls deployed on one date.
pub fn daily_gini<T: Real + Signed>(polls: &[&[FinalBallot]], mode: DailyGiniMode) -> T {
    match mode {
        DailyGiniMode::MeanOfPolls => {
            let g: Vec<T> = polls.iter().map(|b| poll_gini::<T>(b)).collect();
            crate::stats::mean(&g)
        }
        DailyGiniMode::Mle | DailyGiniMode::PooledSample => {
            let totals: Vec<T> = voter_day_totals(polls.iter().copied())
                .into_iter()
                .filter(|a| !a.is_zero())
                .map(|a| a.to_real())
                .collect();
            if mode == DailyGiniMode::Mle {
                mle_gini(&totals)
            } else {
                gini_pairwise(&totals)
            }
        }
    }
}

/// Cumulative share of votes held by the poorest share of voters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LorenzCurve<T: Real = f64> {
    /// `(population share, cumulative vote share)`, ascending, starting at `(0, 0)`.
    pub points: Vec<(T, T)>,
}

impl<T: Real> LorenzCurve<T> {
    /// Gini as one minus twice the trapezoid area under the curve.
    pub fn area_gini(&self) -> T {
        let two = T::of(2.0);
        let area: T = self
            .points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / two)
            .sum();
        T::one() - two * area
    }
}

pub fn lorenz_points<T: Real>(weights: &[T]) -> Result<LorenzCurve<T>> {
    let mut w: Vec<T> = weights.to_vec();
    w.sort_by(|a, b| a.partial_cmp(b).expect("NaN weight"));
    let total: T = w.iter().copied().sum();
    if total <= T::zero() {
        return Err(GovError::Empty("lorenz curve needs a positive weight"));
    }
    let n = T::of_usize(w.len());
    let mut points = Vec::with_capacity(w.len() + 1);
    points.push((T::zero(), T::zero()));
    let mut cum = T::zero();
    for (k, &x) in w.iter().enumerate() {
        cum = cum + x;
        points.push((T::of_usize(k + 1) / n, cum / total));
    }
    // pin the endpoint against rounding drift
    if let Some(last) = points.last_mut() {
        *last = (T::one(), T::one());
    }
    Ok(LorenzCurve { points })
}

pub fn lorenz_from_amounts<T: Real>(weights: &[Amount]) -> Result<LorenzCurve<T>> {
    let w: Vec<T> = weights.iter().map(|a| a.to_real()).collect();
    lorenz_points(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn equal_weights_are_zero() {
        assert_eq!(gini_pairwise(&[10.0, 10.0, 10.0]), 0.0);
        assert_eq!(gini_pairwise::<f64>(&[]), 0.0);
        assert_eq!(gini_pairwise(&[4.0]), 0.0);
        assert_eq!(gini_pairwise(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn hand_case_is_exact_on_rationals() {
        let w: Vec<Ratio<i64>> = [1, 1, 1, 97].iter().map(|&x| Ratio::from_integer(x)).collect();
        assert_eq!(gini_pairwise(&w), Ratio::new(18, 25));
        let zero_one: Vec<Ratio<i64>> = vec![Ratio::from_integer(0), Ratio::from_integer(1)];
        assert_eq!(gini_pairwise(&zero_one), Ratio::new(1, 2));
    }

    #[test]
    fn f32_matches_f64() {
        let g32 = gini_pairwise(&[1.0f32, 1.0, 1.0, 97.0]);
        assert!((g32 - 0.72).abs() < 1e-6);
    }

    #[test]
    fn tail_index_limits() {
        assert_eq!(mle_gini(&[5.0, 5.0, 5.0]), 0.0);
        assert_eq!(mle_gini(&[5.0]), 0.0);
        assert_eq!(mle_gini(&[0.0, 0.0, 3.0]), 0.0);
        // α̂ = 2 / ln(1e6) < 0.5 clips to the ceiling
        let g = mle_gini(&[1.0, 1e6]);
        assert_eq!(g, 1.0 - GINI_CEILING_EPS);
        // α̂ = 2 / ln 2 ≈ 2.885 → 1/(2α̂ − 1)
        let a = 2.0 / 2f64.ln();
        assert!((mle_gini(&[1.0, 2.0]) - 1.0 / (2.0 * a - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn lorenz_hand_cases() {
        let c = lorenz_points(&[1.0, 1.0]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        let c = lorenz_points(&[3.0, 1.0]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]);
        assert!((c.area_gini() - 0.25).abs() < 1e-15);
        assert!(lorenz_points(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn daily_mode_parse() {
        assert_eq!("mle".parse::<DailyGiniMode>().unwrap(), DailyGiniMode::Mle);
        assert_eq!("mean_of_polls".parse::<DailyGiniMode>().unwrap(), DailyGiniMode::MeanOfPolls);
        assert!("median".parse::<DailyGiniMode>().is_err());
    }
}
