//! Descriptive statistics over polls, voters and daily measurements.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;

use crate::centrality::{utc_date, DailyMetrics, Measure, PollMetrics};
use crate::error::{GovError, Result};
use crate::govdata::{final_ballots, Address, Amount, BallotRule, PollId, VoteLog};
use crate::io::csv_string;
use crate::scalar::Real;
use crate::stats::SummaryStats;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VoterProfile {
    pub address: Address,
    pub identity: Option<String>,
    pub involved_polls: usize,
    pub total_votes: Amount,
    /// Smallest poll id the voter has a counted ballot in.
    pub first_poll: PollId,
    /// UTC date of the voter's earliest vote event.
    pub first_date: NaiveDate,
    pub highest_single_vote: Amount,
}

/// One profile per address with a counted ballot, sorted by address.
pub fn voter_profiles(log: &VoteLog, rule: BallotRule) -> Result<Vec<VoterProfile>> {
    let mut first_ts: BTreeMap<&Address, i64> = BTreeMap::new();
    for e in log.events() {
        first_ts.entry(&e.voter).or_insert(e.timestamp);
    }
    let mut acc: BTreeMap<Address, VoterProfile> = BTreeMap::new();
    for id in log.poll_ids() {
        for b in final_ballots(log, id, rule)? {
            let p = acc.entry(b.voter.clone()).or_insert_with(|| VoterProfile {
                identity: log.identity(&b.voter).map(str::to_string),
                first_date: utc_date(first_ts[&b.voter]),
                address: b.voter.clone(),
                involved_polls: 0,
                total_votes: Amount::ZERO,
                first_poll: id,
                highest_single_vote: Amount::ZERO,
            });
            p.involved_polls += 1;
            p.total_votes += b.weight;
            p.first_poll = p.first_poll.min(id);
            p.highest_single_vote = p.highest_single_vote.max(b.weight);
        }
    }
    Ok(acc.into_values().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankCriterion {
    InvolvedPolls,
    TotalVotes,
    HighestSingleVote,
}

impl RankCriterion {
    pub const ALL: [RankCriterion; 3] =
        [RankCriterion::InvolvedPolls, RankCriterion::TotalVotes, RankCriterion::HighestSingleVote];

    pub fn as_str(self) -> &'static str {
        match self {
            RankCriterion::InvolvedPolls => "involved_polls",
            RankCriterion::TotalVotes => "total_votes",
            RankCriterion::HighestSingleVote => "highest_single_vote",
        }
    }
}

impl fmt::Display for RankCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankCriterion {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        RankCriterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown ranking criterion `{s}`"))
    }
}

/// Top `n` profiles, descending by `criterion`, ties by address ascending.
pub fn rank_voters(profiles: &[VoterProfile], criterion: RankCriterion, n: usize) -> Vec<VoterProfile> {
    let mut sorted: Vec<&VoterProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| {
        let ord = match criterion {
            RankCriterion::InvolvedPolls => b.involved_polls.cmp(&a.involved_polls),
            RankCriterion::TotalVotes => b.total_votes.cmp(&a.total_votes),
            RankCriterion::HighestSingleVote => b.highest_single_vote.cmp(&a.highest_single_vote),
        };
        ord.then_with(|| a.address.cmp(&b.address))
    });
    sorted.into_iter().take(n).cloned().collect()
}

/// A named column summary. `configured` marks columns whose definition
/// depends on the abstain-exclusion setting rather than a fixed formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescRow<T: Real = f64> {
    pub name: String,
    pub stats: SummaryStats<T>,
    pub configured: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Descriptives<T: Real = f64> {
    pub rows: Vec<DescRow<T>>,
}

impl<T: Real> Descriptives<T> {
    pub fn row(&self, name: &str) -> Option<&SummaryStats<T>> {
        self.rows.iter().find(|r| r.name == name).map(|r| &r.stats)
    }

    fn push(&mut self, name: &str, xs: &[T], configured: bool) {
        self.rows.push(DescRow {
            name: name.to_string(),
            stats: SummaryStats::of(xs),
            configured,
        });
    }

    pub fn to_csv(&self) -> String {
        csv_string(|w| {
            w.write_record(["column", "n", "mean", "median", "max", "min", "std", "definition"])?;
            for r in &self.rows {
                let s = &r.stats;
                w.write_record([
                    r.name.clone(),
                    s.n.to_string(),
                    s.mean.to_string(),
                    s.median.to_string(),
                    s.max.to_string(),
                    s.min.to_string(),
                    s.std.to_string(),
                    if r.configured { "configured" } else { "fixed" }.to_string(),
                ])?;
            }
            Ok(())
        })
    }
}

pub const POLL_COLUMNS: [&str; 7] = [
    "Total votes",
    "Total voters",
    "Breakdown votes",
    "Breakdown ratio",
    "Breakdown voters",
    "Largest voter votes",
    "Largest voter share",
];

/// Poll-level summary over voted polls.
pub fn poll_descriptives<T: Real>(polls: &[PollMetrics<T>]) -> Result<Descriptives<T>> {
    if polls.is_empty() {
        return Err(GovError::Empty("polls"));
    }
    let col = |f: &dyn Fn(&PollMetrics<T>) -> T| polls.iter().map(f).collect::<Vec<T>>();
    let mut d = Descriptives { rows: Vec::new() };
    d.push(POLL_COLUMNS[0], &col(&|p| p.total_votes.to_real()), false);
    d.push(POLL_COLUMNS[1], &col(&|p| T::of_usize(p.voters)), false);
    d.push(POLL_COLUMNS[2], &col(&|p| p.breakdown_votes.to_real()), true);
    d.push(POLL_COLUMNS[3], &col(&|p| p.breakdown_ratio), true);
    d.push(POLL_COLUMNS[4], &col(&|p| T::of_usize(p.breakdown_voters)), true);
    d.push(POLL_COLUMNS[5], &col(&|p| p.largest_votes.to_real()), false);
    d.push(POLL_COLUMNS[6], &col(&|p| p.largest_share), false);
    Ok(d)
}

pub const VOTER_COLUMNS: [&str; 3] = ["Involved polls", "Total votes", "Highest single vote"];

pub fn voter_descriptives<T: Real>(profiles: &[VoterProfile]) -> Result<Descriptives<T>> {
    if profiles.is_empty() {
        return Err(GovError::Empty("voters"));
    }
    let col = |f: &dyn Fn(&VoterProfile) -> T| profiles.iter().map(f).collect::<Vec<T>>();
    let mut d = Descriptives { rows: Vec::new() };
    d.push(VOTER_COLUMNS[0], &col(&|p| T::of_usize(p.involved_polls)), false);
    d.push(VOTER_COLUMNS[1], &col(&|p| p.total_votes.to_real()), false);
    d.push(VOTER_COLUMNS[2], &col(&|p| p.highest_single_vote.to_real()), false);
    Ok(d)
}

/// Poll-level against daily Gini.
pub fn gini_descriptives<T: Real>(polls: &[PollMetrics<T>], daily: &[DailyMetrics<T>]) -> Descriptives<T> {
    let mut d = Descriptives { rows: Vec::new() };
    d.push("Poll-level", &polls.iter().map(|p| p.gini).collect::<Vec<_>>(), false);
    d.push("Daily", &daily.iter().map(|m| m.gini).collect::<Vec<_>>(), false);
    d
}

/// One row per daily measure, in report order.
pub fn daily_descriptives<T: Real>(daily: &[DailyMetrics<T>]) -> Descriptives<T> {
    let mut d = Descriptives { rows: Vec::new() };
    for m in Measure::ALL {
        d.push(m.name(), &daily.iter().map(|row| row.measure(m)).collect::<Vec<_>>(), false);
    }
    d
}

pub fn profiles_csv(profiles: &[VoterProfile]) -> String {
    csv_string(|w| {
        w.write_record([
            "address",
            "identity",
            "involved_polls",
            "total_votes",
            "first_poll",
            "first_date",
            "highest_single_vote",
        ])?;
        for p in profiles {
            w.write_record([
                p.address.to_string(),
                p.identity.clone().unwrap_or_default(),
                p.involved_polls.to_string(),
                p.total_votes.to_string(),
                p.first_poll.to_string(),
                p.first_date.format("%Y-%m-%d").to_string(),
                p.highest_single_vote.to_string(),
            ])?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{daily_metrics, MetricsConfig};
    use crate::govdata::{PollOption, PollRecord, VoteEvent};

    fn poll(id: u64, deploy: i64) -> PollRecord {
        PollRecord {
            poll_id: id,
            deploy_timestamp: deploy,
            title: String::new(),
            options: vec![PollOption { id: 1, label: "Yes".into() }, PollOption { id: 2, label: "No".into() }],
            abstain_option_ids: Default::default(),
            category: None,
        }
    }

    fn ev(poll_id: u64, voter: u64, w: &str, ts: i64) -> VoteEvent {
        VoteEvent {
            poll_id,
            voter: Address::synthetic(voter),
            option_id: 1,
            weight: w.parse().unwrap(),
            timestamp: ts,
        }
    }

    fn log(polls: &[u64], events: Vec<VoteEvent>) -> VoteLog {
        VoteLog::new(
            events,
            polls.iter().map(|&id| (id, poll(id, 1_600_000_000 + id as i64))).collect(),
            Default::default(),
        )
    }

    #[test]
    fn table_row_shape() {
        let ts = 1_700_000_000;
        let l = log(
            &[631, 640, 650],
            vec![ev(631, 7, "32160", ts), ev(640, 7, "32160", ts + 10), ev(650, 7, "32160", ts + 20)],
        );
        let p = voter_profiles(&l, BallotRule::Last).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].involved_polls, 3);
        assert_eq!(p[0].total_votes, "96480".parse().unwrap());
        assert_eq!(p[0].highest_single_vote, "32160".parse().unwrap());
        assert_eq!(p[0].first_poll, 631);
    }

    #[test]
    fn single_ballot_total_equals_highest() {
        let l = log(&[1], vec![ev(1, 1, "4.25", 1_600_000_100)]);
        let p = voter_profiles(&l, BallotRule::Last).unwrap();
        assert_eq!(p[0].total_votes, p[0].highest_single_vote);
    }

    #[test]
    fn ranking_ties_by_address() {
        let mk = |a: u64, polls: usize, total: u64| VoterProfile {
            address: Address::synthetic(a),
            identity: None,
            involved_polls: polls,
            total_votes: Amount::from_whole(total),
            first_poll: 1,
            first_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            highest_single_vote: Amount::from_whole(total),
        };
        let ps = vec![mk(3, 2, 10), mk(1, 5, 30), mk(2, 2, 20)];
        let by_total: Vec<_> = rank_voters(&ps, RankCriterion::TotalVotes, 10).iter().map(|p| p.address.clone()).collect();
        assert_eq!(by_total, vec![Address::synthetic(1), Address::synthetic(2), Address::synthetic(3)]);
        let by_polls = rank_voters(&ps, RankCriterion::InvolvedPolls, 2);
        assert_eq!(by_polls.len(), 2);
        assert_eq!(by_polls[1].address, Address::synthetic(2));
    }

    #[test]
    fn one_poll_descriptives() {
        let t = 1_600_000_500;
        let l = log(&[1], vec![ev(1, 1, "5", t), ev(1, 2, "3", t + 1), ev(1, 3, "2", t + 2)]);
        let run = daily_metrics::<f64>(&l, &MetricsConfig::default()).unwrap();
        let d = poll_descriptives(&run.polls).unwrap();
        let tv = d.row("Total votes").unwrap();
        assert_eq!((tv.mean, tv.median, tv.max, tv.min), (10.0, 10.0, 10.0, 10.0));
        assert_eq!(d.row("Total voters").unwrap().mean, 3.0);
        assert_eq!(d.row("Breakdown ratio").unwrap().mean, 1.0);
        assert!(d.rows.iter().filter(|r| r.configured).all(|r| r.name.starts_with("Breakdown")));
    }

    #[test]
    fn largest_share_mean() {
        let t = 1_600_000_500;
        let l = log(
            &[1, 2],
            vec![ev(1, 1, "6", t), ev(1, 2, "4", t + 1), ev(2, 1, "8", t + 2), ev(2, 2, "2", t + 3)],
        );
        let run = daily_metrics::<f64>(&l, &MetricsConfig::default()).unwrap();
        let d = poll_descriptives(&run.polls).unwrap();
        assert!((d.row("Largest voter share").unwrap().mean - 0.7).abs() < 1e-12);
    }

    #[test]
    fn empty_log_errors() {
        assert!(poll_descriptives::<f64>(&[]).is_err());
    }
}
