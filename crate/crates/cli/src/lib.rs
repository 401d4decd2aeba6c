//! `govpulse` command-line surface. [`exec_command`] parses arguments, runs
//! one subcommand and returns the process exit code.

pub mod manifest;
pub mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use govpulse_core::centrality::{metrics_csv, poll_metrics_csv, CalendarMode, DailyGiniMode, Measure, MetricsConfig, OrderRule};
use govpulse_core::econ::{iv_grid_csv, ols_grid_csv, GridOptions, InstrumentScreen, StarLevels};
use govpulse_core::factorlab::VolMode;
use govpulse_core::govdata::{
    load_factors, load_vote_log, polls_csv, validate_dataset, votes_csv, BallotRule, FactorPanel, Source,
    ValidationReport, VoteLog,
};
use govpulse_core::io::write_atomic;
use govpulse_core::pipeline::{run_pipeline, with_threads, PipelineConfig, PipelineOutput};
use govpulse_core::profiles::{
    daily_descriptives, gini_descriptives, poll_descriptives, profiles_csv, rank_voters, voter_descriptives,
    RankCriterion,
};
use govpulse_core::synthgov::{gen_history_detailed, gen_panel, EndogenousBlock, PanelPlan, SynthConfig};
use govpulse_core::GovError;

use manifest::Manifest;
use report::{render_report, write_report, Format, ReportInputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GOVPULSE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "govpulse", version, about = "Governance centralization analytics for token-voted DAOs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate input files, writing validation.csv.
    Ingest(IngestArgs),
    /// Per-poll and daily centralization measurements.
    Metrics(MetricsCmd),
    /// Poll, voter and daily descriptive statistics.
    Describe(DescribeCmd),
    /// Univariate regressions of every factor on every measure.
    Regress(RegressCmd),
    /// Instrumented regressions with endogeneity diagnostics.
    Iv(RegressCmd),
    /// Generate a synthetic dataset.
    Synth(SynthCmd),
    /// Run the full pipeline and render report tables and figures.
    Report(ReportCmd),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    #[arg(long)]
    votes: PathBuf,
    #[arg(long)]
    polls: PathBuf,
    #[arg(long)]
    identities: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    #[arg(long, default_value = "drop-missing")]
    calendar: CalendarMode,
    #[arg(long, default_value = "last")]
    ballot: BallotRule,
    #[arg(long, default_value = "last")]
    order: OrderRule,
    #[arg(long = "daily-gini", default_value = "mle")]
    daily_gini: DailyGiniMode,
    /// Abstain options can never be declared the winner.
    #[arg(long)]
    abstain_cannot_win: bool,
}

impl MetricArgs {
    fn config(&self) -> MetricsConfig {
        MetricsConfig {
            ballot: self.ballot,
            order: self.order,
            daily_gini: self.daily_gini,
            calendar: self.calendar,
            abstain_cannot_win: self.abstain_cannot_win,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct RegressArgs {
    #[arg(long, value_delimiter = ',')]
    tokens: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    measures: Vec<Measure>,
    /// Keep variables in their original units instead of z-scores.
    #[arg(long)]
    raw: bool,
    /// Star thresholds, loosest first.
    #[arg(long = "alpha-stars", default_value = "0.1,0.05,0.01")]
    alpha_stars: StarLevels,
    #[arg(long, default_value = "simple")]
    vol: VolMode,
    /// Token whose off-chain voter series instruments the measures.
    #[arg(long)]
    instrument_token: Option<String>,
}

impl RegressArgs {
    fn config(&self, metrics: MetricsConfig, iv_default: bool) -> PipelineConfig {
        let measures = if self.measures.is_empty() {
            if iv_default {
                Measure::INSTRUMENTED.to_vec()
            } else {
                Measure::ALL.to_vec()
            }
        } else {
            self.measures.clone()
        };
        PipelineConfig {
            metrics,
            vol: self.vol,
            grid: GridOptions {
                standardize: !self.raw,
                stars: self.alpha_stars,
            },
            tokens: (!self.tokens.is_empty()).then(|| self.tokens.iter().map(|t| t.to_ascii_uppercase()).collect()),
            measures: if iv_default { Measure::ALL.to_vec() } else { measures.clone() },
            iv_measures: if iv_default { measures } else { Measure::INSTRUMENTED.to_vec() },
            instrument_token: self.instrument_token.clone(),
            skip_iv: !iv_default,
        }
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    factors: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct DescribeCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Rows in each top-voter table.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct RegressCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    regress: RegressArgs,
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SynthCmd {
    /// JSON file with optional `history` and `panel` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ReportCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    regress: RegressArgs,
    #[arg(long)]
    factors: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "csv,markdown")]
    formats: Vec<Format>,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Settings recorded in the run manifest.
#[derive(Serialize, Debug, Default)]
pub struct RunConfig {
    pub command: String,
    pub metrics: Option<MetricsConfig>,
    pub pipeline: Option<PipelineConfig>,
    pub formats: Vec<Format>,
    pub synth: Option<SynthSpec>,
    pub top: Option<usize>,
}

/// Synthetic dataset specification read by `govpulse synth --config`.
#[derive(Serialize, serde::Deserialize, Debug, Clone, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub history: SynthConfig,
    pub panel: PanelPlan,
    /// Seed of the factor panel stream; defaults to a value derived from the history seed.
    pub panel_seed: Option<u64>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let mut panel = PanelPlan::catalogue(&["MKR", "DAI", "ETH"]);
        panel.endogeneity = Some(EndogenousBlock {
            measure: Measure::Voters,
            gamma: 0.0,
            instrument_strength: 0.6,
        });
        SynthSpec {
            history: SynthConfig::default(),
            panel,
            panel_seed: None,
        }
    }
}

struct Failure(String);

impl From<GovError> for Failure {
    fn from(e: GovError) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code: 0 success, 1 validation or I/O failure, 2 usage error.
pub fn exec_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    match with_threads(threads, || dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(command: Command) -> i32 {
    let (out_dir, name) = match &command {
        Command::Ingest(a) => (a.out_dir.clone(), "ingest"),
        Command::Metrics(a) => (a.out_dir.clone(), "metrics"),
        Command::Describe(a) => (a.out_dir.clone(), "describe"),
        Command::Regress(a) => (a.out_dir.clone(), "regress"),
        Command::Iv(a) => (a.out_dir.clone(), "iv"),
        Command::Synth(a) => (a.out_dir.clone(), "synth"),
        Command::Report(a) => (a.out_dir.clone(), "report"),
    };
    let mut m = Manifest::new(name);
    let result = match command {
        Command::Ingest(a) => ingest(a, &mut m),
        Command::Metrics(a) => metrics(a, &mut m),
        Command::Describe(a) => describe(a, &mut m),
        Command::Regress(a) => regress(a, false, &mut m),
        Command::Iv(a) => regress(a, true, &mut m),
        Command::Synth(a) => synth(a, &mut m),
        Command::Report(a) => full_report(a, &mut m),
    };
    let code = match &result {
        Ok(()) => EXIT_OK,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            m.fail(msg);
            EXIT_FAILURE
        }
    };
    if let Err(e) = m.write(&out_dir) {
        eprintln!("error: cannot write run manifest: {e}");
        return EXIT_FAILURE;
    }
    code
}

fn emit(m: &mut Manifest, dir: &Path, name: &str, body: &str) -> CmdResult {
    write_atomic(&dir.join(name), body.as_bytes())?;
    m.output(name);
    Ok(())
}

/// Loads the vote log, writes validation.csv and stops on fatal anomalies.
fn load_validated(input: &InputArgs, m: &mut Manifest, dir: &Path) -> std::result::Result<VoteLog, Failure> {
    m.input("votes", &input.votes);
    m.input("polls", &input.polls);
    if let Some(p) = &input.identities {
        m.input("identities", p);
    }
    let log = load_vote_log(&input.votes, &input.polls, input.identities.as_deref())?;
    let report = validate_dataset(&log);
    emit(m, dir, "validation.csv", &report.to_csv())?;
    check_fatal(&report)?;
    Ok(log)
}

fn check_fatal(report: &ValidationReport) -> CmdResult {
    if report.is_fatal() {
        let n = report.anomalies.iter().filter(|a| a.severity == govpulse_core::govdata::Severity::Fatal).count();
        return Err(Failure(format!("{n} fatal validation anomalies; see validation.csv")));
    }
    Ok(())
}

fn load_panel(path: &Path, m: &mut Manifest, dir: &Path) -> std::result::Result<FactorPanel, Failure> {
    m.input("factors", path);
    let panel = load_factors::<f64>(path)?;
    emit(m, dir, "factor_validation.csv", &panel.report.to_csv())?;
    check_fatal(&panel.report)?;
    Ok(panel)
}

fn ingest(a: IngestArgs, m: &mut Manifest) -> CmdResult {
    m.config(RunConfig { command: "ingest".into(), ..Default::default() });
    let log = load_validated(&a.input, m, &a.out_dir)?;
    let r = validate_dataset(&log);
    println!(
        "events {} polls {} voters {} anomalies {} rejected rows {}",
        r.events,
        r.polls,
        r.voters,
        r.anomalies.len(),
        r.rejected(Source::Votes) + r.rejected(Source::Polls)
    );
    if let Some(f) = &a.factors {
        let panel = load_panel(f, m, &a.out_dir)?;
        println!("factor cells {} anomalies {}", panel.cell_count(), panel.report.anomalies.len());
    }
    Ok(())
}

fn write_metrics(out: &PipelineOutput, m: &mut Manifest, dir: &Path) -> CmdResult {
    emit(m, dir, "metrics.csv", &metrics_csv(&out.run.daily))?;
    emit(m, dir, "poll_metrics.csv", &poll_metrics_csv(&out.run.polls))
}

fn metrics(a: MetricsCmd, m: &mut Manifest) -> CmdResult {
    let cfg = PipelineConfig { metrics: a.metrics.config(), ..Default::default() };
    m.config(RunConfig { command: "metrics".into(), metrics: Some(cfg.metrics), ..Default::default() });
    let log = load_validated(&a.input, m, &a.out_dir)?;
    let out = run_pipeline(&log, None, &cfg)?;
    write_metrics(&out, m, &a.out_dir)?;
    println!("{} daily rows from {} polls ({} without votes)", out.run.daily.len(), out.run.polls.len(), out.run.skipped.len());
    Ok(())
}

fn write_descriptives(out: &PipelineOutput, top: usize, m: &mut Manifest, dir: &Path) -> CmdResult {
    emit(m, dir, "profiles.csv", &profiles_csv(&out.profiles))?;
    for c in RankCriterion::ALL {
        emit(m, dir, &format!("top_voters_{c}.csv"), &profiles_csv(&rank_voters(&out.profiles, c, top)))?;
    }
    if let Ok(d) = poll_descriptives(&out.run.polls) {
        emit(m, dir, "poll_descriptives.csv", &d.to_csv())?;
    }
    if let Ok(d) = voter_descriptives::<f64>(&out.profiles) {
        emit(m, dir, "voter_descriptives.csv", &d.to_csv())?;
    }
    emit(m, dir, "gini_descriptives.csv", &gini_descriptives(&out.run.polls, &out.run.daily).to_csv())?;
    emit(m, dir, "daily_descriptives.csv", &daily_descriptives(&out.run.daily).to_csv())
}

fn describe(a: DescribeCmd, m: &mut Manifest) -> CmdResult {
    let cfg = PipelineConfig { metrics: a.metrics.config(), ..Default::default() };
    m.config(RunConfig {
        command: "describe".into(),
        metrics: Some(cfg.metrics),
        top: Some(a.top),
        ..Default::default()
    });
    let log = load_validated(&a.input, m, &a.out_dir)?;
    let out = run_pipeline(&log, None, &cfg)?;
    write_metrics(&out, m, &a.out_dir)?;
    write_descriptives(&out, a.top, m, &a.out_dir)
}

fn write_grids(out: &PipelineOutput, m: &mut Manifest, dir: &Path) -> CmdResult {
    if let Some(p) = &out.panel {
        emit(m, dir, "panel.csv", &p.factors.to_csv())?;
    }
    if let Some(g) = &out.ols {
        emit(m, dir, "ols_grid.csv", &ols_grid_csv(g))?;
    }
    if let Some(g) = &out.iv {
        emit(m, dir, "iv_grid.csv", &iv_grid_csv(g))?;
    }
    Ok(())
}

fn regress(a: RegressCmd, iv: bool, m: &mut Manifest) -> CmdResult {
    let cfg = a.regress.config(a.metrics.config(), iv);
    m.config(RunConfig {
        command: if iv { "iv" } else { "regress" }.into(),
        pipeline: Some(cfg.clone()),
        ..Default::default()
    });
    let log = load_validated(&a.input, m, &a.out_dir)?;
    let factors = load_panel(&a.factors, m, &a.out_dir)?;
    let mut cfg = cfg;
    if iv {
        // the factor grid is not part of this command's output
        cfg.measures.clear();
    }
    let mut out = run_pipeline(&log, Some(&factors), &cfg)?;
    write_metrics(&out, m, &a.out_dir)?;
    if iv {
        out.ols = None;
    }
    if iv && out.iv.is_none() {
        return Err(Failure("the factor file has no offchain_voters instrument series".into()));
    }
    write_grids(&out, m, &a.out_dir)?;
    if let Some(s) = &out.screen {
        emit(m, &a.out_dir, "instrument_screen.csv", &screen_csv(s))?;
    }
    let fitted = out.ols.as_ref().map_or(0, |g| g.fitted().count()) + out.iv.as_ref().map_or(0, |g| g.fitted().count());
    println!("{fitted} fitted regression cells");
    Ok(())
}

fn synth(a: SynthCmd, m: &mut Manifest) -> CmdResult {
    let mut spec = match &a.config {
        Some(p) => {
            m.input("config", p);
            let text = std::fs::read_to_string(p).map_err(|e| Failure(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<SynthSpec>(&text).map_err(|e| Failure(format!("invalid synth config: {e}")))?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.history.seed = seed;
    }
    m.config(RunConfig { command: "synth".into(), synth: Some(spec.clone()), ..Default::default() });
    let history = gen_history_detailed(&spec.history)?;
    // factor data exist for every calendar day, not only days with polls
    let calendar = MetricsConfig { calendar: CalendarMode::FullCalendar, ..Default::default() };
    let run = govpulse_core::centrality::daily_metrics::<f64>(&history.log, &calendar)?;
    let panel_seed = spec.panel_seed.unwrap_or(spec.history.seed ^ 0x9e37_79b9_7f4a_7c15);
    let panel = gen_panel(&run.daily, &spec.panel, panel_seed)?;
    emit(m, &a.out_dir, "votes.csv", &votes_csv(&history.log))?;
    emit(m, &a.out_dir, "polls.csv", &polls_csv(&history.log))?;
    emit(m, &a.out_dir, "factors.csv", &panel.to_csv())?;
    println!(
        "{} polls, {} events, {} factor cells ({} polls could not be made to go against the largest voter)",
        history.log.registry().len(),
        history.log.events().len(),
        panel.cell_count(),
        history.infeasible.len()
    );
    Ok(())
}

fn full_report(a: ReportCmd, m: &mut Manifest) -> CmdResult {
    let mut cfg = a.regress.config(a.metrics.config(), false);
    cfg.skip_iv = false;
    if !a.regress.measures.is_empty() {
        cfg.iv_measures = a.regress.measures.iter().copied().filter(|x| Measure::INSTRUMENTED.contains(x)).collect();
    }
    let formats: BTreeSet<Format> = a.formats.iter().copied().collect();
    if formats.is_empty() {
        return Err(Failure("at least one output format is required".into()));
    }
    m.config(RunConfig {
        command: "report".into(),
        pipeline: Some(cfg.clone()),
        formats: formats.iter().copied().collect(),
        top: Some(a.top),
        ..Default::default()
    });
    let log = load_validated(&a.input, m, &a.out_dir)?;
    let factors = match &a.factors {
        Some(p) => Some(load_panel(p, m, &a.out_dir)?),
        None => None,
    };
    let out = run_pipeline(&log, factors.as_ref(), &cfg)?;
    write_metrics(&out, m, &a.out_dir)?;
    write_descriptives(&out, a.top, m, &a.out_dir)?;
    write_grids(&out, m, &a.out_dir)?;
    let inputs = ReportInputs {
        polls: &out.run.polls,
        daily: &out.run.daily,
        profiles: &out.profiles,
        ols: out.ols.as_ref(),
        iv: out.iv.as_ref(),
        screen: out.screen.as_ref(),
        lorenz: out.lorenz.as_ref(),
        stars: cfg.grid.stars,
        top_n: a.top,
    };
    let dir = a.out_dir.join("report");
    for name in write_report(&dir, &render_report(&inputs, &formats))? {
        m.output(&format!("report/{name}"));
    }
    check_identities(&out)?;
    println!("report written to {}", dir.display());
    Ok(())
}

/// Structural identities every run must satisfy, whatever the data.
fn check_identities(out: &PipelineOutput) -> CmdResult {
    if let Some(p) = out.run.polls.iter().find(|p| p.largest_share_win > p.largest_share) {
        return Err(Failure(format!("poll {}: largest_share_win exceeds largest_share", p.poll_id)));
    }
    let voters: govpulse_core::govdata::Amount = out.profiles.iter().map(|p| p.total_votes).sum();
    let polls: govpulse_core::govdata::Amount = out.run.polls.iter().map(|p| p.total_votes).sum();
    if voters != polls {
        return Err(Failure(format!("voter totals {voters} differ from poll totals {polls}")));
    }
    Ok(())
}

fn screen_csv(s: &InstrumentScreen) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut rows = vec![["measure", "n", "f", "p", "stars", "perfect"].map(String::from).to_vec()];
    for r in &s.rows {
        rows.push(vec![
            r.measure.to_string(),
            r.n.to_string(),
            r.f.to_string(),
            r.p.to_string(),
            r.stars.0.to_string(),
            r.perfect.to_string(),
        ]);
    }
    for row in rows {
        w.write_record(&row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf8")
}
