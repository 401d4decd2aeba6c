use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::gini::poll_gini;
use crate::error::{GovError, Result};
use crate::govdata::{
    final_ballots, winning_option, winning_option_excluding, Amount, BallotRule, FinalBallot, OptionId, PollId,
    PollRecord, VoteLog, Winner,
};
use crate::scalar::Real;

/// Which appearance of the largest voter defines the order measure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderRule {
    First,
    #[default]
    Last,
}

impl FromStr for OrderRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "first" => Ok(OrderRule::First),
            "last" => Ok(OrderRule::Last),
            _ => Err(format!("unknown order rule `{s}` (expected first|last)")),
        }
    }
}

/// Total votes and number of voters of one poll.
pub fn poll_participation(ballots: &[FinalBallot]) -> (Amount, usize) {
    (ballots.iter().map(|b| b.weight).sum(), ballots.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LargestVoter<T: Real = f64> {
    pub share: T,
    pub ifwin: u8,
    pub share_win: T,
    pub order: T,
    pub votes: Amount,
}

/// The ballot with the largest weight; ties go to the earliest final timestamp.
pub fn largest_ballot(ballots: &[FinalBallot]) -> Option<&FinalBallot> {
    ballots.iter().min_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then(a.final_timestamp.cmp(&b.final_timestamp))
            .then_with(|| a.voter.cmp(&b.voter))
    })
}

/// Share of the largest voter, whether they backed `winner`, the product of
/// the two, and their relative position in the poll's history.
pub fn largest_voter_stats<T: Real>(
    ballots: &[FinalBallot],
    winner: OptionId,
    order_rule: OrderRule,
) -> Result<LargestVoter<T>> {
    let top = largest_ballot(ballots).ok_or(GovError::NoVotes)?;
    let total: Amount = ballots.iter().map(|b| b.weight).sum();
    if total.is_zero() {
        return Err(GovError::NoVotes);
    }
    let share = top.weight.to_real::<T>() / total.to_real::<T>();
    let ifwin = u8::from(top.option_id == winner);
    let position = match order_rule {
        OrderRule::Last => top.history_order_index,
        OrderRule::First => top.first_order_index,
    };
    Ok(LargestVoter {
        share,
        ifwin,
        share_win: if ifwin == 1 { share } else { T::zero() },
        order: T::of_usize(position) / T::of_usize(top.history_len),
        votes: top.weight,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PollSpeed<T: Real = f64> {
    /// Mean seconds from deployment to each voter's counted record.
    pub mean_seconds: T,
    /// Voters whose counted record predates deployment (clamped to zero).
    pub clamped: usize,
}

pub fn poll_speed<T: Real>(ballots: &[FinalBallot], deploy_timestamp: i64) -> Result<PollSpeed<T>> {
    if ballots.is_empty() {
        return Err(GovError::NoVotes);
    }
    let mut clamped = 0;
    let gaps: Vec<T> = ballots
        .iter()
        .map(|b| {
            let gap = b.final_timestamp - deploy_timestamp;
            if gap < 0 {
                clamped += 1;
            }
            T::of(gap.max(0) as f64)
        })
        .collect();
    Ok(PollSpeed {
        mean_seconds: crate::stats::mean(&gaps),
        clamped,
    })
}

/// Options for turning a log into poll and daily measurements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub ballot: BallotRule,
    pub order: OrderRule,
    pub daily_gini: super::gini::DailyGiniMode,
    pub calendar: super::daily::CalendarMode,
    /// Abstain options cannot win unless every ballot abstains.
    pub abstain_cannot_win: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PollMetrics<T: Real = f64> {
    pub poll_id: PollId,
    pub deploy_timestamp: i64,
    pub total_votes: Amount,
    pub voters: usize,
    pub gini: T,
    pub largest_votes: Amount,
    pub largest_share: T,
    pub ifwin: u8,
    pub largest_share_win: T,
    pub order: T,
    pub speed_seconds: T,
    pub speed_clamped: usize,
    pub winner: OptionId,
    pub winner_tie: bool,
    /// Votes on options outside the abstain set.
    pub breakdown_votes: Amount,
    pub breakdown_voters: usize,
    pub breakdown_ratio: T,
}

pub(crate) fn pick_winner(poll: &PollRecord, ballots: &[FinalBallot], cfg: &MetricsConfig) -> Result<Winner> {
    if cfg.abstain_cannot_win {
        winning_option_excluding(ballots, &poll.abstain_option_ids)
    } else {
        winning_option(ballots)
    }
}

/// Poll-level measurements from already-resolved ballots. `None` for polls
/// without ballots or with zero total weight.
pub fn metrics_from_ballots<T: Real + Signed>(
    poll: &PollRecord,
    ballots: &[FinalBallot],
    cfg: &MetricsConfig,
) -> Result<Option<PollMetrics<T>>> {
    let (total_votes, voters) = poll_participation(ballots);
    if voters == 0 || total_votes.is_zero() {
        return Ok(None);
    }
    let winner = pick_winner(poll, ballots, cfg)?;
    let largest = largest_voter_stats::<T>(ballots, winner.option_id, cfg.order)?;
    let speed = poll_speed::<T>(ballots, poll.deploy_timestamp)?;
    let breakdown: Vec<&FinalBallot> = ballots.iter().filter(|b| !poll.is_abstain(b.option_id)).collect();
    let breakdown_votes: Amount = breakdown.iter().map(|b| b.weight).sum();
    Ok(Some(PollMetrics {
        poll_id: poll.poll_id,
        deploy_timestamp: poll.deploy_timestamp,
        total_votes,
        voters,
        gini: poll_gini(ballots),
        largest_votes: largest.votes,
        largest_share: largest.share,
        ifwin: largest.ifwin,
        largest_share_win: largest.share_win,
        order: largest.order,
        speed_seconds: speed.mean_seconds,
        speed_clamped: speed.clamped,
        winner: winner.option_id,
        winner_tie: winner.tie,
        breakdown_votes,
        breakdown_voters: breakdown.len(),
        breakdown_ratio: breakdown_votes.to_real::<T>() / total_votes.to_real::<T>(),
    }))
}

pub fn poll_metrics<T: Real + Signed>(
    log: &VoteLog,
    poll_id: PollId,
    cfg: &MetricsConfig,
) -> Result<Option<PollMetrics<T>>> {
    let poll = log.poll(poll_id).ok_or(GovError::UnknownPoll(poll_id))?;
    let ballots = final_ballots(log, poll_id, cfg.ballot)?;
    metrics_from_ballots(poll, &ballots, cfg)
}
