//! Regression-ready factor panel: returns and rolling volatilities derived
//! from prices, joined with the daily centralization measures.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::centrality::{DailyMetrics, Measure};
use crate::error::{GovError, Result};
use crate::govdata::{
    Anomaly, AnomalyKind, Category, FactorPanel, SeriesKey, Severity, Source, INSTRUMENT_FACTOR, VOL_WINDOWS,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolMode {
    /// Simple returns `P_t / P_{t-1} - 1`.
    #[default]
    Simple,
    /// Log returns `ln(P_t / P_{t-1})`.
    Log,
}

impl FromStr for VolMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "simple" => Ok(VolMode::Simple),
            "log" => Ok(VolMode::Log),
            _ => Err(format!("unknown return mode `{s}` (expected simple|log)")),
        }
    }
}

/// Daily returns of a calendar-contiguous price series. The first entry, any
/// entry next to a gap, and any entry touching a non-positive price is `None`.
/// The second value lists indices of non-positive prices.
pub fn daily_return<T: Real>(prices: &[Option<T>], mode: VolMode) -> (Vec<Option<T>>, Vec<usize>) {
    let bad: Vec<usize> = prices
        .iter()
        .enumerate()
        .filter(|(_, p)| matches!(p, Some(v) if *v <= T::zero()))
        .map(|(i, _)| i)
        .collect();
    let ok = |p: Option<T>| p.filter(|v| *v > T::zero());
    let mut out = vec![None; prices.len()];
    for t in 1..prices.len() {
        if let (Some(prev), Some(cur)) = (ok(prices[t - 1]), ok(prices[t])) {
            out[t] = Some(match mode {
                VolMode::Simple => cur / prev - T::one(),
                VolMode::Log => (cur / prev).ln(),
            });
        }
    }
    (out, bad)
}

/// Rolling sample standard deviation over the `k` most recent returns,
/// defined only where all `k` are present.
pub fn rolling_vol<T: Real>(returns: &[Option<T>], k: usize) -> Result<Vec<Option<T>>> {
    if k < 2 {
        return Err(GovError::Config(format!("volatility window must be at least 2, got {k}")));
    }
    let mut out = vec![None; returns.len()];
    let mut window: Vec<T> = Vec::with_capacity(k);
    for t in (k - 1)..returns.len() {
        window.clear();
        window.extend(returns[t + 1 - k..=t].iter().map_while(|r| *r));
        if window.len() == k {
            out[t] = Some(crate::stats::sample_std(&window));
        }
    }
    Ok(out)
}

fn calendar<T: Real>(series: &BTreeMap<NaiveDate, T>) -> (Vec<NaiveDate>, Vec<Option<T>>) {
    let (Some(first), Some(last)) = (series.keys().next(), series.keys().next_back()) else {
        return (Vec::new(), Vec::new());
    };
    let dates: Vec<NaiveDate> = first.iter_days().take_while(|d| d <= last).collect();
    let values = dates.iter().map(|d| series.get(d).copied()).collect();
    (dates, values)
}

pub fn vol_factor_name(k: usize) -> String {
    format!("v{k}")
}

/// Adds `r` and `v2..v60` for every token that has a financial `Price` series.
/// Derived values replace ingested ones under the same key (flagged).
pub fn build_panel<T: Real>(raw: &FactorPanel<T>, mode: VolMode) -> Result<FactorPanel<T>> {
    let mut panel = raw.clone();
    let priced: Vec<(String, BTreeMap<NaiveDate, T>)> = raw
        .keys()
        .filter(|k| k.category == Category::Financial && k.factor == "Price")
        .map(|k| (k.token.clone(), raw.series(k).cloned().unwrap_or_default()))
        .collect();
    for (token, prices) in priced {
        let (dates, values) = calendar(&prices);
        let (returns, bad) = daily_return(&values, mode);
        for i in bad {
            panel.report.push(Anomaly::new(
                Severity::Warning,
                AnomalyKind::NonPositivePrice,
                Source::Factors,
                format!("{token} Price on {} is not positive", dates[i]),
            ));
        }
        let mut derived = vec![("r".to_string(), returns.clone())];
        for k in VOL_WINDOWS {
            derived.push((vol_factor_name(k), rolling_vol(&returns, k)?));
        }
        for (name, values) in derived {
            let key = SeriesKey::new(&token, Category::Financial, &name);
            if panel.series(&key).is_some() {
                panel.report.push(Anomaly::new(
                    Severity::Info,
                    AnomalyKind::DerivedOverride,
                    Source::Factors,
                    format!("{token} {name} recomputed from Price"),
                ));
            }
            let series: BTreeMap<NaiveDate, T> = dates
                .iter()
                .zip(values)
                .filter_map(|(d, v)| v.map(|v| (*d, v)))
                .collect();
            panel.series_mut().insert(key, series);
        }
    }
    panel.report.sort();
    Ok(panel)
}

/// Date-aligned pair with no missing values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlignedSample<T: Real = f64> {
    pub dates: Vec<NaiveDate>,
    pub y: Vec<T>,
    pub x: Vec<T>,
}

impl<T: Real> AlignedSample<T> {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Date-aligned triple for instrumented regressions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IvSample<T: Real = f64> {
    pub dates: Vec<NaiveDate>,
    pub y: Vec<T>,
    pub x: Vec<T>,
    pub z: Vec<T>,
}

/// Pairwise-complete alignment: the dates present in both series.
pub fn align<T: Real>(y: &BTreeMap<NaiveDate, T>, x: &BTreeMap<NaiveDate, T>) -> AlignedSample<T> {
    let mut s = AlignedSample::default();
    for (d, &yv) in y {
        if let Some(&xv) = x.get(d) {
            if yv.is_finite() && xv.is_finite() {
                s.dates.push(*d);
                s.y.push(yv);
                s.x.push(xv);
            }
        }
    }
    s
}

pub fn align3<T: Real>(
    y: &BTreeMap<NaiveDate, T>,
    x: &BTreeMap<NaiveDate, T>,
    z: &BTreeMap<NaiveDate, T>,
) -> IvSample<T> {
    let mut s = IvSample::default();
    for (d, &yv) in y {
        if let (Some(&xv), Some(&zv)) = (x.get(d), z.get(d)) {
            if yv.is_finite() && xv.is_finite() && zv.is_finite() {
                s.dates.push(*d);
                s.y.push(yv);
                s.x.push(xv);
                s.z.push(zv);
            }
        }
    }
    s
}

/// One measure of the daily series as a date map.
pub fn measure_series<T: Real>(daily: &[DailyMetrics<T>], m: Measure) -> BTreeMap<NaiveDate, T> {
    daily.iter().map(|d| (d.date, d.measure(m))).collect()
}

/// Factor panel joined with the daily measures on date.
#[derive(Clone, Debug)]
pub struct AnalysisPanel<T: Real = f64> {
    pub factors: FactorPanel<T>,
    pub measures: BTreeMap<Measure, BTreeMap<NaiveDate, T>>,
}

impl<T: Real> AnalysisPanel<T> {
    pub fn new(factors: FactorPanel<T>, daily: &[DailyMetrics<T>]) -> Self {
        let measures = Measure::ALL.into_iter().map(|m| (m, measure_series(daily, m))).collect();
        AnalysisPanel { factors, measures }
    }

    /// `None` when the factor series is absent.
    pub fn sample(&self, key: &SeriesKey, m: Measure) -> Option<AlignedSample<T>> {
        Some(align(self.factors.series(key)?, &self.measures[&m]))
    }

    pub fn iv_sample(&self, key: &SeriesKey, m: Measure, instrument: &SeriesKey) -> Option<IvSample<T>> {
        Some(align3(self.factors.series(key)?, &self.measures[&m], self.factors.series(instrument)?))
    }

    /// The instrument series key: under `token` if present, else the first token carrying one.
    pub fn instrument_key(&self, token: Option<&str>) -> Option<SeriesKey> {
        let keys: BTreeSet<&SeriesKey> = self
            .factors
            .keys()
            .filter(|k| k.category == Category::Instrument && k.factor == INSTRUMENT_FACTOR)
            .collect();
        token
            .map(|t| SeriesKey::new(t, Category::Instrument, INSTRUMENT_FACTOR))
            .filter(|k| keys.contains(k))
            .or_else(|| keys.first().map(|k| (*k).clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[f64]) -> Vec<Option<f64>> {
        xs.iter().map(|&x| Some(x)).collect()
    }

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, day).unwrap()
    }

    #[test]
    fn simple_returns() {
        assert_eq!(daily_return(&s(&[100.0, 110.0]), VolMode::Simple).0[1].map(|r| (r - 0.1).abs() < 1e-15), Some(true));
        assert_eq!(daily_return(&s(&[100.0, 50.0, 100.0]), VolMode::Simple).0, vec![None, Some(-0.5), Some(1.0)]);
        assert_eq!(daily_return(&s(&[3.0, 3.0, 3.0]), VolMode::Simple).0, vec![None, Some(0.0), Some(0.0)]);
    }

    #[test]
    fn non_positive_price_is_missing() {
        let (r, bad) = daily_return(&s(&[100.0, 0.0, 100.0, 110.0]), VolMode::Simple);
        assert_eq!(bad, vec![1]);
        assert_eq!(&r[..3], &[None, None, None]);
        assert!(r[3].is_some());
    }

    #[test]
    fn two_point_vol() {
        let v = rolling_vol(&s(&[0.01, 0.03]), 2).unwrap();
        assert_eq!(v[0], None);
        assert!((v[1].unwrap() - 0.014142135623730951).abs() < 1e-15);
        assert_eq!(rolling_vol(&s(&[0.01, 0.03]), 3).unwrap(), vec![None, None]);
        assert!(rolling_vol(&s(&[0.2; 10]), 4).unwrap().iter().flatten().all(|&v| v == 0.0));
        assert!(rolling_vol::<f64>(&[], 1).is_err());
    }

    #[test]
    fn price_only_panel_gains_derived() {
        let mut raw = FactorPanel::<f64>::new();
        for day in 1..=20 {
            raw.insert(d(day), SeriesKey::new("MKR", Category::Financial, "Price"), 100.0 + day as f64);
        }
        let p = build_panel(&raw, VolMode::Simple).unwrap();
        for name in ["r", "v2", "v3", "v4", "v5", "v6", "v7", "v14", "v30", "v60"] {
            assert!(p.series(&SeriesKey::new("MKR", Category::Financial, name)).is_some(), "{name}");
        }
        assert_eq!(p.series(&SeriesKey::new("MKR", Category::Financial, "r")).unwrap().len(), 19);
        assert!(p.series(&SeriesKey::new("MKR", Category::Financial, "v30")).unwrap().is_empty());
    }

    #[test]
    fn alignment_is_intersection() {
        let y: BTreeMap<_, _> = [(d(1), 1.0), (d(2), 2.0), (d(4), 4.0)].into();
        let x: BTreeMap<_, _> = [(d(2), 20.0), (d(3), 30.0), (d(4), 40.0)].into();
        let a = align(&y, &x);
        assert_eq!(a.dates, vec![d(2), d(4)]);
        assert_eq!(a.y, vec![2.0, 4.0]);
        assert_eq!(align(&x, &y).dates, a.dates);
    }
}
