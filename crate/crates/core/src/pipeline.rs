//! End-to-end orchestration: metrics, profiles, factor panel and grids.

use serde::Serialize;

use crate::centrality::{daily_metrics, lorenz_from_amounts, LorenzCurve, Measure, MetricsConfig, MetricsRun};
use crate::econ::{
    instrument_screen, panel_tokens, run_factor_matrix, run_iv_suite, GridOptions, InstrumentScreen, IvFit, OlsFit,
    RegressionGrid,
};
use crate::error::{GovError, Result};
use crate::factorlab::{build_panel, AnalysisPanel, VolMode};
use crate::govdata::{FactorPanel, VoteLog};
use crate::profiles::{voter_profiles, VoterProfile};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub metrics: MetricsConfig,
    pub vol: VolMode,
    pub grid: GridOptions,
    /// Tokens to regress; `None` takes every token in the panel.
    pub tokens: Option<Vec<String>>,
    pub measures: Vec<Measure>,
    pub iv_measures: Vec<Measure>,
    pub instrument_token: Option<String>,
    /// Skip the instrumented suite even when an instrument is present.
    pub skip_iv: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            metrics: MetricsConfig::default(),
            vol: VolMode::Simple,
            grid: GridOptions::default(),
            tokens: None,
            measures: Measure::ALL.to_vec(),
            iv_measures: Measure::INSTRUMENTED.to_vec(),
            instrument_token: None,
            skip_iv: false,
        }
    }
}

pub struct PipelineOutput {
    pub run: MetricsRun,
    pub profiles: Vec<VoterProfile>,
    /// Lorenz curve of voters' total votes.
    pub lorenz: Option<LorenzCurve>,
    pub panel: Option<AnalysisPanel>,
    pub ols: Option<RegressionGrid<OlsFit>>,
    pub iv: Option<RegressionGrid<IvFit>>,
    pub screen: Option<InstrumentScreen>,
}

/// Runs every stage that the inputs allow. Regression stages need `factors`;
/// the instrumented suite additionally needs an instrument series.
pub fn run_pipeline(log: &VoteLog, factors: Option<&FactorPanel>, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let run = daily_metrics::<f64>(log, &cfg.metrics)?;
    let profiles = voter_profiles(log, cfg.metrics.ballot)?;
    let totals: Vec<_> = profiles.iter().map(|p| p.total_votes).collect();
    let lorenz = lorenz_from_amounts(&totals).ok();
    let mut out = PipelineOutput {
        run,
        profiles,
        lorenz,
        panel: None,
        ols: None,
        iv: None,
        screen: None,
    };
    let Some(raw) = factors else {
        return Ok(out);
    };
    let panel = AnalysisPanel::new(build_panel(raw, cfg.vol)?, &out.run.daily);
    let tokens = cfg.tokens.clone().unwrap_or_else(|| panel_tokens(&panel));
    out.ols = Some(run_factor_matrix(&panel, &tokens, &cfg.measures, &cfg.grid));
    if !cfg.skip_iv {
        if let Some(key) = panel.instrument_key(cfg.instrument_token.as_deref()) {
            out.iv = Some(run_iv_suite(&panel, &tokens, &cfg.iv_measures, &key, &cfg.grid));
            out.screen = Some(instrument_screen(&panel, &key, &Measure::ALL, &cfg.grid.stars));
        }
    }
    out.panel = Some(panel);
    Ok(out)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| GovError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
