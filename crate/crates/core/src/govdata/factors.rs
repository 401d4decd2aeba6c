use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::report::{Anomaly, AnomalyKind, Severity, Source, ValidationReport};
use crate::error::Result;
use crate::io::{check_header, csv_string, open_csv};
use crate::scalar::Real;

pub const FACTORS_HEADER: [&str; 5] = ["date", "token", "category", "factor", "value"];
pub const INSTRUMENT_FACTOR: &str = "offchain_voters";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Financial,
    Transaction,
    Exchange,
    Network,
    Sentiment,
    Instrument,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Financial,
        Category::Transaction,
        Category::Exchange,
        Category::Network,
        Category::Sentiment,
        Category::Instrument,
    ];

    /// Categories that enter the factor regressions.
    pub const REGRESSABLE: [Category; 5] = [
        Category::Financial,
        Category::Transaction,
        Category::Exchange,
        Category::Network,
        Category::Sentiment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Financial => "financial",
            Category::Transaction => "transaction",
            Category::Exchange => "exchange",
            Category::Network => "network",
            Category::Sentiment => "sentiment",
            Category::Instrument => "instrument",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivation {
    Ingested,
    Derived,
}

/// One catalogue entry. `{Tok}` in the template stands for the token symbol
/// in title case, so `Vol{Tok}` is `VolMkr` for MKR and `VolDai` for DAI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorSpec {
    pub template: &'static str,
    pub category: Category,
    pub derivation: Derivation,
}

impl FactorSpec {
    pub fn is_token_native(&self) -> bool {
        self.template.contains("{Tok}")
    }

    pub fn name_for(&self, token: &str) -> String {
        if self.is_token_native() {
            self.template.replace("{Tok}", &title_case(token))
        } else {
            self.template.to_string()
        }
    }
}

fn title_case(token: &str) -> String {
    let lower = token.to_ascii_lowercase();
    let mut c = lower.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

pub const VOL_WINDOWS: [usize; 9] = [2, 3, 4, 5, 6, 7, 14, 30, 60];

macro_rules! spec {
    ($t:expr, $c:ident) => {
        FactorSpec { template: $t, category: Category::$c, derivation: Derivation::Ingested }
    };
    ($t:expr, $c:ident, derived) => {
        FactorSpec { template: $t, category: Category::$c, derivation: Derivation::Derived }
    };
}

static CATALOGUE: [FactorSpec; 38] = [
    spec!("Price", Financial),
    spec!("r", Financial, derived),
    spec!("v2", Financial, derived),
    spec!("v3", Financial, derived),
    spec!("v4", Financial, derived),
    spec!("v5", Financial, derived),
    spec!("v6", Financial, derived),
    spec!("v7", Financial, derived),
    spec!("v14", Financial, derived),
    spec!("v30", Financial, derived),
    spec!("v60", Financial, derived),
    spec!("AvgBlcUsd", Transaction),
    spec!("AvgSize{Tok}", Transaction),
    spec!("AvgSizeUsd", Transaction),
    spec!("LargeVol{Tok}", Transaction),
    spec!("LargeVolUsd", Transaction),
    spec!("LargeCnt", Transaction),
    spec!("Vol{Tok}", Transaction),
    spec!("VolUsd", Transaction),
    spec!("TxnCnt", Transaction),
    spec!("InCnt", Exchange),
    spec!("InVol{Tok}", Exchange),
    spec!("InVolUsd", Exchange),
    spec!("OutCnt", Exchange),
    spec!("OutVol{Tok}", Exchange),
    spec!("OutVolUsd", Exchange),
    spec!("Net{Tok}", Exchange),
    spec!("NetUsd", Exchange),
    spec!("Total{Tok}", Exchange),
    spec!("TotalUsd", Exchange),
    spec!("TotalWithBlc", Network),
    spec!("New", Network),
    spec!("Active", Network),
    spec!("ActiveRatio", Network),
    spec!("Positive", Sentiment),
    spec!("Neutral", Sentiment),
    spec!("Negative", Sentiment),
    spec!(INSTRUMENT_FACTOR, Instrument),
];

/// The registered factor catalogue.
#[derive(Clone, Copy, Debug, Default)]
pub struct FactorCatalogue;

impl FactorCatalogue {
    pub fn entries(&self) -> &'static [FactorSpec] {
        &CATALOGUE
    }

    /// Catalogue factor names for `token` in `category`, in table order.
    pub fn names(&self, token: &str, category: Category) -> Vec<String> {
        CATALOGUE
            .iter()
            .filter(|s| s.category == category)
            .map(|s| s.name_for(token))
            .collect()
    }

    pub fn lookup(&self, token: &str, category: Category, factor: &str) -> Option<&'static FactorSpec> {
        CATALOGUE
            .iter()
            .find(|s| s.category == category && s.name_for(token) == factor)
    }

    pub fn is_known(&self, token: &str, category: Category, factor: &str) -> bool {
        self.lookup(token, category, factor).is_some()
    }

    /// Number of regressable factors per token (all categories except the instrument).
    pub fn regressable_count(&self) -> usize {
        CATALOGUE.iter().filter(|s| s.category != Category::Instrument).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub token: String,
    pub category: Category,
    pub factor: String,
}

impl SeriesKey {
    pub fn new(token: &str, category: Category, factor: &str) -> Self {
        SeriesKey {
            token: token.to_ascii_uppercase(),
            category,
            factor: factor.to_string(),
        }
    }
}

/// Date-indexed factor values keyed by (token, category, factor).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactorPanel<T: Real = f64> {
    series: BTreeMap<SeriesKey, BTreeMap<NaiveDate, T>>,
    pub report: ValidationReport,
}

impl<T: Real> FactorPanel<T> {
    pub fn new() -> Self {
        FactorPanel {
            series: BTreeMap::new(),
            report: ValidationReport::default(),
        }
    }

    /// Inserts a value, returning the previous one for the same key.
    pub fn insert(&mut self, date: NaiveDate, key: SeriesKey, value: T) -> Option<T> {
        self.series.entry(key).or_default().insert(date, value)
    }

    pub fn series(&self, key: &SeriesKey) -> Option<&BTreeMap<NaiveDate, T>> {
        self.series.get(key)
    }

    pub fn series_mut(&mut self) -> &mut BTreeMap<SeriesKey, BTreeMap<NaiveDate, T>> {
        &mut self.series
    }

    pub fn keys(&self) -> impl Iterator<Item = &SeriesKey> + '_ {
        self.series.keys()
    }

    pub fn get(&self, date: NaiveDate, key: &SeriesKey) -> Option<T> {
        self.series.get(key).and_then(|s| s.get(&date)).copied()
    }

    pub fn cell_count(&self) -> usize {
        self.series.values().map(BTreeMap::len).sum()
    }

    pub fn tokens(&self) -> Vec<String> {
        let mut t: Vec<String> = self.series.keys().map(|k| k.token.clone()).collect();
        t.dedup();
        t.sort();
        t.dedup();
        t
    }

    /// Iterates all cells in (token, category, factor, date) order.
    pub fn cells(&self) -> impl Iterator<Item = (NaiveDate, &SeriesKey, T)> + '_ {
        self.series
            .iter()
            .flat_map(|(k, s)| s.iter().map(move |(d, v)| (*d, k, *v)))
    }

    pub fn to_csv(&self) -> String {
        csv_string(|w| {
            w.write_record(FACTORS_HEADER)?;
            for (date, key, value) in self.cells() {
                w.write_record([
                    date.format("%Y-%m-%d").to_string(),
                    key.token.clone(),
                    key.category.to_string(),
                    key.factor.clone(),
                    value.to_string(),
                ])?;
            }
            Ok(())
        })
    }
}

fn parse_factor_row<T: Real>(
    rec: &csv::StringRecord,
) -> std::result::Result<(NaiveDate, SeriesKey, T), (AnomalyKind, String)> {
    let malformed = |d: String| (AnomalyKind::MalformedRow, d);
    if rec.len() != FACTORS_HEADER.len() {
        return Err(malformed(format!("expected 5 fields, found {}", rec.len())));
    }
    let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
        .map_err(|_| (AnomalyKind::BadDate, format!("bad date `{}`", &rec[0])))?;
    if rec[1].is_empty() {
        return Err(malformed("empty token".into()));
    }
    let category: Category = rec[2].parse().map_err(malformed)?;
    if rec[3].is_empty() {
        return Err(malformed("empty factor".into()));
    }
    let value: f64 = rec[4]
        .parse()
        .map_err(|_| malformed(format!("bad value `{}`", &rec[4])))?;
    if !value.is_finite() {
        return Err(malformed(format!("non-finite value `{}`", &rec[4])));
    }
    Ok((date, SeriesKey::new(&rec[1], category, &rec[3]), T::of(value)))
}

/// Loads a long-format factor file. Duplicate keys keep the last value.
pub fn load_factors<T: Real>(path: &Path) -> Result<FactorPanel<T>> {
    let mut rdr = open_csv(path)?;
    check_header(path, &mut rdr, &FACTORS_HEADER, &[])?;
    let mut panel = FactorPanel::new();
    let catalogue = FactorCatalogue;
    let mut flagged_unknown = std::collections::BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        let parsed = rec
            .map_err(|e| (AnomalyKind::MalformedRow, e.to_string()))
            .and_then(|r| parse_factor_row::<T>(&r));
        match parsed {
            Ok((date, key, value)) => {
                if !catalogue.is_known(&key.token, key.category, &key.factor)
                    && flagged_unknown.insert(key.clone())
                {
                    panel.report.push(
                        Anomaly::new(
                            Severity::Info,
                            AnomalyKind::UnknownFactor,
                            Source::Factors,
                            format!("{} {} `{}` is not in the catalogue", key.token, key.category, key.factor),
                        )
                        .at_line(line),
                    );
                }
                let detail = format!("{} {} {} on {date} repeated", key.token, key.category, key.factor);
                if panel.insert(date, key, value).is_some() {
                    panel.report.push(
                        Anomaly::new(Severity::Warning, AnomalyKind::DuplicateKey, Source::Factors, detail)
                            .at_line(line),
                    );
                }
            }
            Err((kind, detail)) => panel
                .report
                .push(Anomaly::new(Severity::Warning, kind, Source::Factors, detail).at_line(line)),
        }
    }
    panel.report.sort();
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(body: &str) -> FactorPanel<f64> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, body).unwrap();
        load_factors(&p).unwrap()
    }

    #[test]
    fn catalogue_shape() {
        let c = FactorCatalogue;
        assert_eq!(c.regressable_count(), 37);
        assert_eq!(c.names("MKR", Category::Financial).len(), 11);
        assert_eq!(c.names("MKR", Category::Transaction).len(), 9);
        assert_eq!(c.names("DAI", Category::Exchange).len(), 10);
        assert_eq!(c.names("DAI", Category::Network).len(), 4);
        assert_eq!(c.names("ETH", Category::Sentiment).len(), 3);
        assert!(c.is_known("MKR", Category::Transaction, "AvgSizeMkr"));
        assert!(c.is_known("DAI", Category::Exchange, "NetDai"));
        assert!(!c.is_known("MKR", Category::Exchange, "NetDai"));
        let derived: Vec<_> = c
            .entries()
            .iter()
            .filter(|s| s.derivation == Derivation::Derived)
            .map(|s| s.template)
            .collect();
        assert_eq!(derived, ["r", "v2", "v3", "v4", "v5", "v6", "v7", "v14", "v30", "v60"]);
    }

    #[test]
    fn two_dates_two_cells() {
        let p = load("date,token,category,factor,value\n2021-01-01,MKR,financial,Price,100\n2021-01-02,MKR,financial,Price,110\n");
        assert_eq!(p.cell_count(), 2);
        assert!(p.report.anomalies.is_empty());
    }

    #[test]
    fn same_factor_three_tokens() {
        let p = load("date,token,category,factor,value\n2021-01-01,MKR,financial,Price,1\n2021-01-01,DAI,financial,Price,1\n2021-01-01,eth,financial,Price,1\n");
        assert_eq!(p.cell_count(), 3);
        assert_eq!(p.tokens(), ["DAI", "ETH", "MKR"]);
    }

    #[test]
    fn duplicate_last_wins() {
        let p = load("date,token,category,factor,value\n2021-01-01,MKR,financial,Price,5\n2021-01-01,MKR,financial,Price,7\n");
        assert_eq!(p.cell_count(), 1);
        let d = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        assert_eq!(p.get(d, &SeriesKey::new("MKR", Category::Financial, "Price")), Some(7.0));
        assert_eq!(p.report.anomalies.len(), 1);
        assert_eq!(p.report.count(AnomalyKind::DuplicateKey), 1);
    }

    #[test]
    fn unknown_factor_kept_bad_date_skipped() {
        let p = load("date,token,category,factor,value\n2021-01-01,MKR,network,Whales,5\n01/02/2021,MKR,financial,Price,7\n");
        assert_eq!(p.cell_count(), 1);
        assert_eq!(p.report.count(AnomalyKind::UnknownFactor), 1);
        assert_eq!(p.report.count(AnomalyKind::BadDate), 1);
    }
}
