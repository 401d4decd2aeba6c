use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GovError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PollsPerDay {
    Constant { count: usize },
    Poisson { mean: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySpec {
    Constant { seconds: f64 },
    Exponential { mean: f64 },
    Uniform { min: f64, max: f64 },
}

/// Shape of the holdings distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldingsModel {
    /// Pareto type II: `scale * ((1 - u)^(-1/alpha) - 1)`.
    #[default]
    Lomax,
    /// Pareto type I: `scale * (1 - u)^(-1/alpha)`.
    Pareto,
}

/// How the quantile levels of the holdings are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldingsSampling {
    /// Midpoints `(i + 0.5) / N` randomly assigned to voters.
    #[default]
    Stratified,
    /// Independent uniform draws.
    Iid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub days: usize,
    pub polls_per_day: PollsPerDay,
    pub voter_pool: usize,
    pub holdings_alpha: f64,
    pub holdings_scale: f64,
    pub holdings_model: HoldingsModel,
    pub holdings_sampling: HoldingsSampling,
    /// Base probability that a voter takes part in a poll.
    pub participation_rate: f64,
    /// Raises participation of voters far from the median holding (in log
    /// terms); 0 gives uniform participation.
    pub participation_skew: f64,
    pub revision_rate: f64,
    pub abstain_rate: f64,
    pub largest_wins_prob: f64,
    pub vote_delay: DelaySpec,
    pub start_timestamp: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            days: 638,
            polls_per_day: PollsPerDay::Constant { count: 1 },
            voter_pool: 200,
            holdings_alpha: 1.2,
            holdings_scale: 300.0,
            holdings_model: HoldingsModel::Lomax,
            holdings_sampling: HoldingsSampling::Stratified,
            participation_rate: 0.05,
            participation_skew: 0.5,
            revision_rate: 0.1,
            abstain_rate: 0.05,
            largest_wins_prob: 0.8,
            vote_delay: DelaySpec::Exponential { mean: 240_000.0 },
            start_timestamp: 1_560_000_000,
            seed: 0,
        }
    }
}

fn fraction(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(GovError::Config(format!("{name} must be in [0, 1], got {v}")))
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        fraction("participation_rate", self.participation_rate)?;
        fraction("revision_rate", self.revision_rate)?;
        fraction("abstain_rate", self.abstain_rate)?;
        fraction("largest_wins_prob", self.largest_wins_prob)?;
        if !(self.holdings_alpha > 1.0 && self.holdings_alpha.is_finite()) {
            return Err(GovError::Config(format!("holdings_alpha must exceed 1, got {}", self.holdings_alpha)));
        }
        if !(self.holdings_scale > 0.0 && self.holdings_scale.is_finite()) {
            return Err(GovError::Config("holdings_scale must be positive".into()));
        }
        if !(self.participation_skew >= 0.0 && self.participation_skew.is_finite()) {
            return Err(GovError::Config("participation_skew must be non-negative".into()));
        }
        if self.voter_pool == 0 {
            return Err(GovError::Config("voter_pool must be positive".into()));
        }
        if self.start_timestamp <= 0 {
            return Err(GovError::Config("start_timestamp must be positive".into()));
        }
        match self.polls_per_day {
            PollsPerDay::Poisson { mean } if !(mean > 0.0 && mean.is_finite()) => {
                return Err(GovError::Config("polls_per_day mean must be positive".into()))
            }
            _ => {}
        }
        let bad_delay = match self.vote_delay {
            DelaySpec::Constant { seconds } => !(seconds >= 0.0 && seconds.is_finite()),
            DelaySpec::Exponential { mean } => !(mean > 0.0 && mean.is_finite()),
            DelaySpec::Uniform { min, max } => !(0.0 <= min && min <= max && max.is_finite()),
        };
        if bad_delay {
            return Err(GovError::Config("vote_delay parameters out of range".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GovError::io(path, e))?;
        let cfg: SynthConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
