use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::dist::f_sf;
use super::iv::{two_sls_with, IvFit};
use super::ols::{ols_with, OlsFit, StarLevels, Stars};
use crate::centrality::Measure;
use crate::factorlab::{align, AnalysisPanel};
use crate::govdata::{Category, FactorCatalogue, SeriesKey};
use crate::io::csv_string;
use crate::scalar::Real;
use crate::stats::{standardize, SummaryStats};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridOptions {
    /// Z-score every variable over its aligned sample before fitting.
    pub standardize: bool,
    pub stars: StarLevels,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            standardize: true,
            stars: StarLevels::default(),
        }
    }
}

impl GridOptions {
    pub fn scaling(&self) -> &'static str {
        if self.standardize {
            "standardized"
        } else {
            "raw"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum CellStatus<F> {
    Fit(F),
    NoData,
    Insufficient(usize),
    Failed(String),
}

impl<F> CellStatus<F> {
    pub fn label(&self) -> &'static str {
        match self {
            CellStatus::Fit(_) => "ok",
            CellStatus::NoData => "no data",
            CellStatus::Insufficient(_) => "insufficient",
            CellStatus::Failed(_) => "failed",
        }
    }

    pub fn fit(&self) -> Option<&F> {
        match self {
            CellStatus::Fit(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCell<F> {
    pub token: String,
    pub category: Category,
    pub factor: String,
    pub measure: Measure,
    pub status: CellStatus<F>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionGrid<F> {
    pub cells: Vec<GridCell<F>>,
    pub scaling: &'static str,
}

impl<F> RegressionGrid<F> {
    pub fn fitted(&self) -> impl Iterator<Item = (&GridCell<F>, &F)> + '_ {
        self.cells.iter().filter_map(|c| c.status.fit().map(|f| (c, f)))
    }

    pub fn get(&self, token: &str, factor: &str, measure: Measure) -> Option<&GridCell<F>> {
        self.cells
            .iter()
            .find(|c| c.token == token && c.factor == factor && c.measure == measure)
    }
}

/// Catalogue factors of `token` in table order, then uncatalogued factors
/// present in the panel, grouped by category.
pub fn factor_keys<T: Real>(panel: &AnalysisPanel<T>, token: &str) -> Vec<SeriesKey> {
    let catalogue = FactorCatalogue;
    let token = token.to_ascii_uppercase();
    let mut keys = Vec::new();
    for cat in Category::REGRESSABLE {
        let known = catalogue.names(&token, cat);
        keys.extend(known.iter().map(|f| SeriesKey::new(&token, cat, f)));
        let extra: BTreeSet<&SeriesKey> = panel
            .factors
            .keys()
            .filter(|k| k.token == token && k.category == cat && !known.contains(&k.factor))
            .collect();
        keys.extend(extra.into_iter().cloned());
    }
    keys
}

/// Tokens with at least one regressable series.
pub fn panel_tokens<T: Real>(panel: &AnalysisPanel<T>) -> Vec<String> {
    let set: BTreeSet<String> = panel
        .factors
        .keys()
        .filter(|k| k.category != Category::Instrument)
        .map(|k| k.token.clone())
        .collect();
    set.into_iter().collect()
}

fn plan<T: Real>(panel: &AnalysisPanel<T>, tokens: &[String], measures: &[Measure]) -> Vec<(SeriesKey, Measure)> {
    tokens
        .iter()
        .flat_map(|t| factor_keys(panel, t))
        .flat_map(|k| measures.iter().map(move |&m| (k.clone(), m)))
        .collect()
}

fn scale<T: Real>(v: Vec<T>, on: bool) -> Vec<T> {
    if on {
        standardize(&v)
    } else {
        v
    }
}

fn cell<F>(key: SeriesKey, measure: Measure, status: CellStatus<F>) -> GridCell<F> {
    GridCell {
        token: key.token,
        category: key.category,
        factor: key.factor,
        measure,
        status,
    }
}

/// Univariate regressions of every factor on every measure, in token,
/// category, factor, measure order. Cells are fitted in parallel.
pub fn run_factor_matrix<T: Real>(
    panel: &AnalysisPanel<T>,
    tokens: &[String],
    measures: &[Measure],
    opts: &GridOptions,
) -> RegressionGrid<OlsFit<T>> {
    let cells = plan(panel, tokens, measures)
        .into_par_iter()
        .map(|(key, m)| {
            let status = match panel.sample(&key, m) {
                None => CellStatus::NoData,
                Some(s) if s.is_empty() => CellStatus::NoData,
                Some(s) if s.len() < 3 => CellStatus::Insufficient(s.len()),
                Some(s) => {
                    let (y, x) = (scale(s.y, opts.standardize), scale(s.x, opts.standardize));
                    match ols_with(&y, &x, &opts.stars) {
                        Ok(f) => CellStatus::Fit(f),
                        Err(e) => CellStatus::Failed(e.to_string()),
                    }
                }
            };
            cell(key, m, status)
        })
        .collect();
    RegressionGrid {
        cells,
        scaling: opts.scaling(),
    }
}

/// Instrumented regressions of every factor on each of `measures`.
pub fn run_iv_suite<T: Real>(
    panel: &AnalysisPanel<T>,
    tokens: &[String],
    measures: &[Measure],
    instrument: &SeriesKey,
    opts: &GridOptions,
) -> RegressionGrid<IvFit<T>> {
    let cells = plan(panel, tokens, measures)
        .into_par_iter()
        .map(|(key, m)| {
            let status = match panel.iv_sample(&key, m, instrument) {
                None => CellStatus::NoData,
                Some(s) if s.dates.is_empty() => CellStatus::NoData,
                Some(s) if s.dates.len() < 4 => CellStatus::Insufficient(s.dates.len()),
                Some(s) => {
                    let on = opts.standardize;
                    let (y, x, z) = (scale(s.y, on), scale(s.x, on), scale(s.z, on));
                    match two_sls_with(&y, &x, &z, &opts.stars) {
                        Ok(f) => CellStatus::Fit(f),
                        Err(e) => CellStatus::Failed(e.to_string()),
                    }
                }
            };
            cell(key, m, status)
        })
        .collect();
    RegressionGrid {
        cells,
        scaling: opts.scaling(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreenRow<T: Real = f64> {
    pub measure: Measure,
    pub n: usize,
    pub f: T,
    pub p: T,
    pub stars: Stars,
    /// The instrument explains the measure exactly.
    pub perfect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstrumentScreen<T: Real = f64> {
    pub rows: Vec<ScreenRow<T>>,
    pub descriptives: SummaryStats<T>,
}

/// Strength of the instrument for each measure (F of the measure on the
/// instrument) and descriptives of the instrument series.
pub fn instrument_screen<T: Real>(
    panel: &AnalysisPanel<T>,
    instrument: &SeriesKey,
    measures: &[Measure],
    stars: &StarLevels,
) -> InstrumentScreen<T> {
    let series = panel.factors.series(instrument).cloned().unwrap_or_default();
    let values: Vec<T> = series.values().copied().collect();
    let rows = measures
        .iter()
        .map(|&m| {
            let s = align(&panel.measures[&m], &series);
            let (f, p) = match ols_with(&s.y, &s.x, stars) {
                Ok(fit) => {
                    let f = fit.t1 * fit.t1;
                    (f, f_sf(f, 1, s.len() - 2))
                }
                Err(_) => (T::nan(), T::nan()),
            };
            ScreenRow {
                measure: m,
                n: s.len(),
                f,
                p,
                stars: stars.stars(p.as_f64()),
                perfect: f.is_infinite(),
            }
        })
        .collect();
    InstrumentScreen {
        rows,
        descriptives: SummaryStats::of(&values),
    }
}

const KEY_COLS: [&str; 6] = ["token", "category", "factor", "measure", "status", "n"];

fn key_fields<F>(c: &GridCell<F>, n: Option<usize>) -> Vec<String> {
    let n = match (&c.status, n) {
        (_, Some(n)) => n.to_string(),
        (CellStatus::Insufficient(k), None) => k.to_string(),
        _ => String::new(),
    };
    vec![
        c.token.clone(),
        c.category.to_string(),
        c.factor.clone(),
        c.measure.to_string(),
        c.status.label().to_string(),
        n,
    ]
}

/// Shortest round-trip text; exponent form for very small or large magnitudes.
fn nums<T: Real>(vals: &[T]) -> Vec<String> {
    vals.iter()
        .map(|&v| {
            let a = v.abs();
            if a != T::zero() && a.is_finite() && (a < T::of(1e-5) || a >= T::of(1e16)) {
                format!("{v:e}")
            } else {
                v.to_string()
            }
        })
        .collect()
}

pub fn ols_grid_csv<T: Real>(grid: &RegressionGrid<OlsFit<T>>) -> String {
    csv_string(|w| {
        let mut head: Vec<&str> = KEY_COLS.to_vec();
        head.extend(["beta0", "beta1", "se0", "se1", "t0", "t1", "p0", "p1", "stars", "r2", "adj_r2", "scaling"]);
        w.write_record(&head)?;
        for c in &grid.cells {
            let fit = c.status.fit();
            let mut row = key_fields(c, fit.map(|f| f.n));
            match fit {
                Some(f) => {
                    row.extend(nums(&[f.beta0, f.beta1, f.se0, f.se1, f.t0, f.t1, f.p0, f.p1]));
                    row.push(f.stars.to_string());
                    row.extend(nums(&[f.r2, f.adj_r2]));
                }
                None => row.extend(std::iter::repeat_n(String::new(), 11)),
            }
            row.push(grid.scaling.to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn iv_grid_csv<T: Real>(grid: &RegressionGrid<IvFit<T>>) -> String {
    csv_string(|w| {
        let mut head: Vec<&str> = KEY_COLS.to_vec();
        head.extend([
            "first_beta1",
            "first_t1",
            "partial_f",
            "partial_f_p",
            "beta0",
            "beta1",
            "se1",
            "t1",
            "p1",
            "stars",
            "adj_r2",
            "durbin",
            "durbin_p",
            "wu_hausman",
            "wu_hausman_p",
            "scaling",
        ]);
        w.write_record(&head)?;
        for c in &grid.cells {
            let fit = c.status.fit();
            let mut row = key_fields(c, fit.map(|f| f.n));
            match fit {
                Some(f) => {
                    let s = &f.second_stage;
                    row.extend(nums(&[f.first_stage.beta1, f.first_stage.t1, f.partial_f, f.partial_f_p]));
                    row.extend(nums(&[s.beta0, s.beta1, s.se1, s.t1, s.p1]));
                    row.push(s.stars.to_string());
                    row.extend(nums(&[f.adj_r2]));
                    match &f.endogeneity {
                        Some(e) => row.extend(nums(&[e.durbin, e.durbin_p, e.wu_hausman, e.wu_hausman_p])),
                        None => row.extend(std::iter::repeat_n(String::new(), 4)),
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), 15)),
            }
            row.push(grid.scaling.to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::DailyMetrics;
    use crate::govdata::FactorPanel;
    use chrono::NaiveDate;

    fn daily(n: usize) -> Vec<DailyMetrics<f64>> {
        let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        (0..n)
            .map(|i| DailyMetrics {
                date: start + chrono::Days::new(i as u64),
                poll_count: 1,
                voters: 10 + (i * 7) % 13,
                total_votes: 1000.0 + ((i * 31) % 17) as f64,
                largest_share: 0.3 + ((i * 3) % 5) as f64 / 10.0,
                largest_share_win: 0.2,
                order: 0.5,
                speed: 100.0 + i as f64,
                gini: 0.8,
                missing: false,
            })
            .collect()
    }

    #[test]
    fn financial_grid_has_77_cells() {
        let d = daily(40);
        let mut raw = FactorPanel::new();
        for (i, m) in d.iter().enumerate() {
            raw.insert(m.date, SeriesKey::new("MKR", Category::Financial, "Price"), 100.0 + (i % 9) as f64);
        }
        let panel = AnalysisPanel::new(crate::factorlab::build_panel(&raw, Default::default()).unwrap(), &d);
        let mut g = run_factor_matrix(&panel, &["MKR".into()], &Measure::ALL, &GridOptions::default());
        g.cells.retain(|c| c.category == Category::Financial);
        assert_eq!(g.cells.len(), 77);
        let v60 = g.get("MKR", "v60", Measure::Voters).unwrap();
        assert_eq!(v60.status, CellStatus::NoData);
        // the Order and LargestShareWin measures are constant here
        assert!(matches!(g.get("MKR", "Price", Measure::Order).unwrap().status, CellStatus::Failed(_)));
        assert!(g.get("MKR", "Price", Measure::Voters).unwrap().status.fit().is_some());
    }

    #[test]
    fn absent_token_is_no_data() {
        let d = daily(10);
        let panel = AnalysisPanel::new(FactorPanel::new(), &d);
        let g = run_factor_matrix(&panel, &["DAI".into()], &[Measure::Voters], &GridOptions::default());
        assert_eq!(g.cells.len(), 37);
        assert!(g.cells.iter().all(|c| c.status == CellStatus::NoData));
    }

    #[test]
    fn self_instrument_screen_is_perfect() {
        let d = daily(30);
        let mut raw = FactorPanel::new();
        for m in &d {
            raw.insert(m.date, SeriesKey::new("MKR", Category::Instrument, "offchain_voters"), m.voters as f64);
        }
        let panel = AnalysisPanel::new(raw, &d);
        let key = panel.instrument_key(None).unwrap();
        let s = instrument_screen(&panel, &key, &[Measure::Voters, Measure::Speed], &StarLevels::default());
        assert!(s.rows[0].perfect);
        assert_eq!(s.rows[0].p, 0.0);
        assert!(!s.rows[1].perfect);
        assert_eq!(s.descriptives.n, 30);
    }
}
