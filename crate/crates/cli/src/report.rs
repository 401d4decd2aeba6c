//! Table and figure rendering. Everything here is a pure function of the
//! computed results; [`write_report`] only adds the atomic file writes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use govpulse_core::centrality::{utc_date, DailyMetrics, LorenzCurve, Measure, PollMetrics};
use govpulse_core::econ::{InstrumentScreen, IvFit, OlsFit, RegressionGrid, StarLevels, Stars};
use govpulse_core::govdata::Category;
use govpulse_core::io::write_atomic;
use govpulse_core::profiles::{
    daily_descriptives, gini_descriptives, poll_descriptives, rank_voters, voter_descriptives, Descriptives,
    RankCriterion, VoterProfile,
};
use govpulse_core::stats::SummaryStats;
use govpulse_core::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Markdown,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv|markdown|svg)")),
        }
    }
}

/// Everything a report can show; absent parts render as nothing.
pub struct ReportInputs<'a> {
    pub polls: &'a [PollMetrics],
    pub daily: &'a [DailyMetrics],
    pub profiles: &'a [VoterProfile],
    pub ols: Option<&'a RegressionGrid<OlsFit>>,
    pub iv: Option<&'a RegressionGrid<IvFit>>,
    pub screen: Option<&'a InstrumentScreen>,
    pub lorenz: Option<&'a LorenzCurve>,
    pub stars: StarLevels,
    pub top_n: usize,
}

/// Rendered files keyed by name, in name order.
pub type Rendered = BTreeMap<String, String>;

/// Regression cell in table style: `2.13* (1.86)`.
pub fn format_cell(beta: f64, stars: Stars, t: f64) -> String {
    format!("{}{} ({})", two_dp(beta), stars, two_dp(t))
}

fn two_dp(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.4}")
    }
}

fn md_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "| {} |", headers.join(" | "));
    let _ = writeln!(s, "|{}", "---|".repeat(headers.len()));
    for r in rows {
        let _ = writeln!(s, "| {} |", r.join(" | "));
    }
    s
}

fn csv_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv_writer();
    w.write_record(headers).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

struct Table {
    stem: String,
    title: String,
    note: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn emit(&self, formats: &BTreeSet<Format>, out: &mut Rendered) {
        if formats.contains(&Format::Markdown) {
            let mut s = format!("## {}\n\n", self.title);
            s.push_str(&md_table(&self.headers, &self.rows));
            if !self.note.is_empty() {
                let _ = write!(s, "\n{}\n", self.note);
            }
            out.insert(format!("{}.md", self.stem), s);
        }
        if formats.contains(&Format::Csv) {
            out.insert(format!("{}.csv", self.stem), csv_table(&self.headers, &self.rows));
        }
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn desc_table(stem: &str, title: &str, d: &Descriptives) -> Table {
    let configured = d.rows.iter().any(|r| r.configured);
    Table {
        stem: stem.into(),
        title: title.into(),
        note: if configured {
            "Rows marked (configured) depend on the abstain-exclusion setting.".into()
        } else {
            String::new()
        },
        headers: strings(&["Column", "Mean", "Median", "Max", "Min", "Std", "N"]),
        rows: d
            .rows
            .iter()
            .map(|r| {
                let s: &SummaryStats = &r.stats;
                let name = if r.configured { format!("{} (configured)", r.name) } else { r.name.clone() };
                vec![name, num(s.mean), num(s.median), num(s.max), num(s.min), num(s.std), s.n.to_string()]
            })
            .collect(),
    }
}

fn empty_desc_table(stem: &str, title: &str) -> Table {
    Table {
        stem: stem.into(),
        title: title.into(),
        note: String::new(),
        headers: strings(&["Column", "Mean", "Median", "Max", "Min", "Std", "N"]),
        rows: Vec::new(),
    }
}

fn top_voter_table(profiles: &[VoterProfile], c: RankCriterion, n: usize) -> Table {
    Table {
        stem: format!("top_voters_{c}"),
        title: format!("Top {n} voters by {c}"),
        note: String::new(),
        headers: strings(&["Address", "Identity", "Involved polls", "Total votes", "Highest single vote", "First poll", "Since"]),
        rows: rank_voters(profiles, c, n)
            .into_iter()
            .map(|p| {
                vec![
                    p.address.to_string(),
                    p.identity.unwrap_or_default(),
                    p.involved_polls.to_string(),
                    p.total_votes.to_string(),
                    p.highest_single_vote.to_string(),
                    p.first_poll.to_string(),
                    p.first_date.format("%Y-%m-%d").to_string(),
                ]
            })
            .collect(),
    }
}

/// `(token, category) -> factors in grid order`.
fn grid_layout<F>(grid: &RegressionGrid<F>) -> Vec<((String, Category), Vec<String>, Vec<Measure>)> {
    let mut layout: Vec<((String, Category), Vec<String>, Vec<Measure>)> = Vec::new();
    for c in &grid.cells {
        let key = (c.token.clone(), c.category);
        if layout.last().map(|l| &l.0) != Some(&key) {
            layout.push((key, Vec::new(), Vec::new()));
        }
        let entry = layout.last_mut().expect("just pushed");
        if !entry.1.contains(&c.factor) {
            entry.1.push(c.factor.clone());
        }
        if !entry.2.contains(&c.measure) {
            entry.2.push(c.measure);
        }
    }
    layout
}

fn ols_tables(grid: &RegressionGrid<OlsFit>) -> Vec<Table> {
    let mut tables = Vec::new();
    for ((token, cat), factors, measures) in grid_layout(grid) {
        let mut headers = vec!["Factor".to_string()];
        headers.extend(measures.iter().map(|m| m.to_string()));
        let rows = factors
            .iter()
            .map(|f| {
                let mut row = vec![f.clone()];
                for &m in &measures {
                    let cell = grid.get(&token, f, m).and_then(|c| c.status.fit().map(|fit| (c, fit)));
                    row.push(match cell {
                        Some((_, fit)) => format_cell(fit.beta1, fit.stars, fit.t1),
                        None => grid.get(&token, f, m).map(|c| c.status.label().to_string()).unwrap_or_default(),
                    });
                }
                row
            })
            .collect();
        tables.push(Table {
            stem: format!("ols_{}_{}", token.to_ascii_lowercase(), cat),
            title: format!("{token} {cat} factors on centralization measures"),
            note: format!(
                "Coefficient with t-statistic in parentheses; variables {}. * p <= {{s1}}, ** p <= {{s2}}, *** p <= {{s3}}.",
                grid.scaling
            ),
            headers,
            rows,
        });
    }
    tables
}

fn fill_stars(note: &str, stars: &StarLevels) -> String {
    note.replace("{s1}", &stars.0[0].to_string())
        .replace("{s2}", &stars.0[1].to_string())
        .replace("{s3}", &stars.0[2].to_string())
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn iv_tables(grid: &RegressionGrid<IvFit>) -> Vec<Table> {
    let mut tables = Vec::new();
    for ((token, cat), factors, measures) in grid_layout(grid) {
        for (panel, &m) in measures.iter().enumerate() {
            let letter = (b'A' + (panel % 26) as u8) as char;
            let rows = factors
                .iter()
                .map(|f| {
                    let cell = grid.get(&token, f, m);
                    match cell.and_then(|c| c.status.fit()) {
                        Some(fit) => {
                            let s = &fit.second_stage;
                            let e = fit.endogeneity.as_ref();
                            vec![
                                f.clone(),
                                format_cell(s.beta1, s.stars, s.t1),
                                num(fit.partial_f),
                                opt_num(e.map(|e| e.durbin)),
                                opt_num(e.map(|e| e.durbin_p)),
                                opt_num(e.map(|e| e.wu_hausman)),
                                opt_num(e.map(|e| e.wu_hausman_p)),
                                num(fit.adj_r2),
                                fit.n.to_string(),
                            ]
                        }
                        None => {
                            let mut r = vec![f.clone(), cell.map(|c| c.status.label().to_string()).unwrap_or_default()];
                            r.extend(std::iter::repeat_n(String::new(), 7));
                            r
                        }
                    }
                })
                .collect();
            tables.push(Table {
                stem: format!("iv_{}_{}_{}", token.to_ascii_lowercase(), cat, m.name().to_ascii_lowercase()),
                title: format!("Panel {letter}: {token} {cat} factors on instrumented {m}"),
                note: format!(
                    "Second-stage coefficient with t-statistic in parentheses; variables {}. Durbin and Wu-Hausman test the null that {m} is exogenous. * p <= {{s1}}, ** p <= {{s2}}, *** p <= {{s3}}.",
                    grid.scaling
                ),
                headers: strings(&["Factor", "Coefficient", "Partial F", "Durbin", "Durbin p", "Wu-Hausman", "Wu-Hausman p", "Adj. R2", "N"]),
                rows,
            });
        }
    }
    tables
}

/// Significant OLS cells grouped by measure and category, each as
/// `factor (token) ↑|↓`.
pub fn effects_summary(grid: &RegressionGrid<OlsFit>) -> BTreeMap<(Measure, Category), Vec<String>> {
    let mut out: BTreeMap<(Measure, Category), Vec<String>> = BTreeMap::new();
    for (c, fit) in grid.fitted() {
        if fit.stars.0 >= 1 {
            let arrow = if fit.beta1 >= 0.0 { "↑" } else { "↓" };
            out.entry((c.measure, c.category))
                .or_default()
                .push(format!("{} ({}) {arrow}", c.factor, c.token));
        }
    }
    out
}

fn effects_table(grid: &RegressionGrid<OlsFit>, stars: &StarLevels) -> Table {
    let summary = effects_summary(grid);
    let mut headers = vec!["Measure".to_string()];
    headers.extend(Category::REGRESSABLE.iter().map(|c| c.to_string()));
    let rows = Measure::ALL
        .iter()
        .map(|&m| {
            let mut row = vec![m.to_string()];
            for cat in Category::REGRESSABLE {
                row.push(summary.get(&(m, cat)).map(|v| v.join("; ")).unwrap_or_default());
            }
            row
        })
        .collect();
    Table {
        stem: "effects_summary".into(),
        title: "Relationships between measurements and factors".into(),
        note: format!(
            "Factors significant at p <= {}; arrows give the sign of the coefficient.",
            stars.loosest()
        ),
        headers,
        rows,
    }
}

fn screen_table(screen: &InstrumentScreen) -> Table {
    let mut rows: Vec<Vec<String>> = screen
        .rows
        .iter()
        .map(|r| {
            let f = if r.perfect { "inf (perfect fit)".to_string() } else { num(r.f) };
            vec![r.measure.to_string(), format!("{f}{}", r.stars), num(r.p), r.n.to_string()]
        })
        .collect();
    let d = &screen.descriptives;
    rows.push(vec![
        "Off-chain voters".into(),
        format!("mean {} / median {} / max {} / min {} / std {}", num(d.mean), num(d.median), num(d.max), num(d.min), num(d.std)),
        String::new(),
        d.n.to_string(),
    ]);
    Table {
        stem: "instrument_screen".into(),
        title: "Correlations and descriptive statistics of the instrument".into(),
        note: "F-statistic of each measure regressed on the instrument.".into(),
        headers: strings(&["Measure", "F", "p", "N"]),
        rows,
    }
}

fn figure_data(inputs: &ReportInputs, out: &mut Rendered) {
    let counts = inputs
        .daily
        .iter()
        .map(|d| vec![d.date.format("%Y-%m-%d").to_string(), d.poll_count.to_string(), d.voters.to_string()])
        .collect::<Vec<_>>();
    out.insert("daily_counts.csv".into(), csv_table(&strings(&["date", "polls", "voters"]), &counts));
    let votes = inputs
        .polls
        .iter()
        .map(|p| {
            vec![
                p.poll_id.to_string(),
                utc_date(p.deploy_timestamp).format("%Y-%m-%d").to_string(),
                p.total_votes.to_string(),
                p.largest_votes.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    out.insert(
        "poll_votes.csv".into(),
        csv_table(&strings(&["poll_id", "date", "total_votes", "largest_votes"]), &votes),
    );
    let poll_g = inputs
        .polls
        .iter()
        .map(|p| vec![p.poll_id.to_string(), utc_date(p.deploy_timestamp).format("%Y-%m-%d").to_string(), p.gini.to_string()])
        .collect::<Vec<_>>();
    out.insert("poll_gini.csv".into(), csv_table(&strings(&["poll_id", "date", "gini"]), &poll_g));
    let daily_g = inputs
        .daily
        .iter()
        .map(|d| vec![d.date.format("%Y-%m-%d").to_string(), d.gini.to_string()])
        .collect::<Vec<_>>();
    out.insert("daily_gini.csv".into(), csv_table(&strings(&["date", "gini"]), &daily_g));
    if let Some(l) = inputs.lorenz {
        let rows = l.points.iter().map(|(p, c)| vec![p.to_string(), c.to_string()]).collect::<Vec<_>>();
        out.insert("lorenz.csv".into(), csv_table(&strings(&["population_share", "vote_share"]), &rows));
    }
}

/// Minimal SVG line chart of `(x, y)` points.
pub fn svg_line_chart(title: &str, series: &[(f64, f64)]) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{title}</title>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    let _ = writeln!(
        s,
        "<text x=\"{pad}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>"
    );
    let _ = writeln!(
        s,
        "<polyline fill=\"none\" stroke=\"#888\" points=\"{pad},{y0} {x1},{y0}\"/>",
        y0 = h - pad,
        x1 = w - pad
    );
    if series.len() >= 2 {
        let (xmin, xmax) = minmax(series.iter().map(|p| p.0));
        let (ymin, ymax) = minmax(series.iter().map(|p| p.1));
        let sx = |x: f64| pad + (x - xmin) / (xmax - xmin).max(f64::MIN_POSITIVE) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - ymin) / (ymax - ymin).max(f64::MIN_POSITIVE) * (h - 2.0 * pad);
        let pts: Vec<String> = series.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" "));
        let _ = writeln!(
            s,
            "<text x=\"{pad}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">min {ymin:.4} max {ymax:.4}</text>",
            h - 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn minmax(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn figures_svg(inputs: &ReportInputs, out: &mut Rendered) {
    let idx = |v: Vec<f64>| v.into_iter().enumerate().map(|(i, y)| (i as f64, y)).collect::<Vec<_>>();
    out.insert(
        "daily_voters.svg".into(),
        svg_line_chart("Daily voters", &idx(inputs.daily.iter().map(|d| d.voters as f64).collect())),
    );
    out.insert(
        "daily_gini.svg".into(),
        svg_line_chart("Daily Gini", &idx(inputs.daily.iter().map(|d| d.gini).collect())),
    );
    if let Some(l) = inputs.lorenz {
        out.insert("lorenz.svg".into(), svg_line_chart("Lorenz curve of total votes", &l.points));
    }
}

/// Renders all tables and figure files for `formats`.
pub fn render_report(inputs: &ReportInputs, formats: &BTreeSet<Format>) -> Rendered {
    let mut out = Rendered::new();
    let mut tables = Vec::new();
    tables.push(match poll_descriptives(inputs.polls) {
        Ok(d) => desc_table("table_polls", "Descriptive statistics of governance polls", &d),
        Err(_) => empty_desc_table("table_polls", "Descriptive statistics of governance polls"),
    });
    tables.push(match voter_descriptives(inputs.profiles) {
        Ok(d) => desc_table("table_voters", "Descriptive statistics of voters", &d),
        Err(_) => empty_desc_table("table_voters", "Descriptive statistics of voters"),
    });
    for c in RankCriterion::ALL {
        tables.push(top_voter_table(inputs.profiles, c, inputs.top_n));
    }
    tables.push(desc_table(
        "table_gini",
        "Gini coefficients: poll-level and daily",
        &gini_descriptives(inputs.polls, inputs.daily),
    ));
    tables.push(desc_table(
        "table_daily",
        "Measurements of governance centralization",
        &daily_descriptives(inputs.daily),
    ));
    if let Some(g) = inputs.ols {
        tables.extend(ols_tables(g));
        tables.push(effects_table(g, &inputs.stars));
    }
    if let Some(g) = inputs.iv {
        tables.extend(iv_tables(g));
    }
    if let Some(s) = inputs.screen {
        tables.push(screen_table(s));
    }
    for t in &mut tables {
        t.note = fill_stars(&t.note, &inputs.stars);
    }
    for t in &tables {
        t.emit(formats, &mut out);
    }
    if formats.contains(&Format::Markdown) {
        let index: String = tables
            .iter()
            .map(|t| format!("- [{}]({}.md)\n", t.title, t.stem))
            .collect();
        out.insert("README.md".into(), format!("# Report\n\n{index}"));
    }
    figure_data(inputs, &mut out);
    if formats.contains(&Format::Svg) {
        figures_svg(inputs, &mut out);
    }
    out
}

/// Writes rendered files into `dir` and returns their names.
pub fn write_report(dir: &Path, rendered: &Rendered) -> Result<Vec<String>> {
    for (name, body) in rendered {
        write_atomic(&dir.join(name), body.as_bytes())?;
    }
    Ok(rendered.keys().cloned().collect())
}
