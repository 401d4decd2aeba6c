use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate};
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gini::daily_gini;
use super::poll::{metrics_from_ballots, MetricsConfig, PollMetrics};
use crate::error::Result;
use crate::govdata::{final_ballots, Amount, FinalBallot, PollId, VoteLog};
use crate::io::csv_string;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalendarMode {
    /// Only dates with at least one voted poll.
    #[default]
    DropMissing,
    /// Every date between the first and last poll; empty dates are zero rows flagged missing.
    FullCalendar,
}

impl FromStr for CalendarMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "drop-missing" | "drop_missing" => Ok(CalendarMode::DropMissing),
            "full-calendar" | "full_calendar" => Ok(CalendarMode::FullCalendar),
            _ => Err(format!("unknown calendar mode `{s}` (expected drop-missing|full-calendar)")),
        }
    }
}

/// The seven daily centralization measurements, in report column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    Voters,
    TotalVotes,
    LargestShare,
    LargestShareWin,
    Gini,
    Order,
    Speed,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Voters,
        Measure::TotalVotes,
        Measure::LargestShare,
        Measure::LargestShareWin,
        Measure::Gini,
        Measure::Order,
        Measure::Speed,
    ];

    /// Measures instrumented in the IV suite by default.
    pub const INSTRUMENTED: [Measure; 3] = [Measure::Voters, Measure::TotalVotes, Measure::Speed];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Voters => "Voters",
            Measure::TotalVotes => "TotalVotes",
            Measure::LargestShare => "LargestShare",
            Measure::LargestShareWin => "LargestShareWin",
            Measure::Gini => "Gini",
            Measure::Order => "Order",
            Measure::Speed => "Speed",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Measure::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DailyMetrics<T: Real = f64> {
    pub date: NaiveDate,
    pub poll_count: usize,
    pub voters: usize,
    pub total_votes: T,
    pub largest_share: T,
    pub largest_share_win: T,
    pub order: T,
    pub speed: T,
    pub gini: T,
    pub missing: bool,
}

impl<T: Real> DailyMetrics<T> {
    pub fn measure(&self, m: Measure) -> T {
        match m {
            Measure::Voters => T::of_usize(self.voters),
            Measure::TotalVotes => self.total_votes,
            Measure::LargestShare => self.largest_share,
            Measure::LargestShareWin => self.largest_share_win,
            Measure::Gini => self.gini,
            Measure::Order => self.order,
            Measure::Speed => self.speed,
        }
    }

    fn empty(date: NaiveDate) -> Self {
        DailyMetrics {
            date,
            poll_count: 0,
            voters: 0,
            total_votes: T::zero(),
            largest_share: T::zero(),
            largest_share_win: T::zero(),
            order: T::zero(),
            speed: T::zero(),
            gini: T::zero(),
            missing: true,
        }
    }
}

pub fn utc_date(ts: i64) -> NaiveDate {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.date_naive())
        .unwrap_or(NaiveDate::MIN)
}

/// Poll-level and daily measurements of a whole log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRun<T: Real = f64> {
    pub polls: Vec<PollMetrics<T>>,
    pub daily: Vec<DailyMetrics<T>>,
    /// Polls with no ballots or zero total weight.
    pub skipped: Vec<PollId>,
}

struct PollWork<T: Real> {
    ballots: Vec<FinalBallot>,
    metrics: PollMetrics<T>,
}

/// Computes per-poll metrics (in parallel on the ambient rayon pool) and
/// aggregates them per UTC deploy date: voters and total votes are summed,
/// the share, order and speed measures are averaged over the day's polls and
/// the Gini follows `cfg.daily_gini`. Output is in ascending date order.
pub fn daily_metrics<T: Real + Signed>(log: &VoteLog, cfg: &MetricsConfig) -> Result<MetricsRun<T>> {
    let ids: Vec<PollId> = log.poll_ids().collect();
    let computed: Vec<(PollId, Option<PollWork<T>>)> = ids
        .par_iter()
        .map(|&id| -> Result<(PollId, Option<PollWork<T>>)> {
            let poll = log.poll(id).expect("id from registry");
            let ballots = final_ballots(log, id, cfg.ballot)?;
            let work = metrics_from_ballots(poll, &ballots, cfg)?.map(|metrics| PollWork { ballots, metrics });
            Ok((id, work))
        })
        .collect::<Result<_>>()?;

    let mut skipped = Vec::new();
    let mut by_date: BTreeMap<NaiveDate, Vec<PollWork<T>>> = BTreeMap::new();
    for (id, work) in computed {
        match work {
            Some(w) => by_date.entry(utc_date(w.metrics.deploy_timestamp)).or_default().push(w),
            None => skipped.push(id),
        }
    }

    let mut daily = Vec::with_capacity(by_date.len());
    for (&date, works) in &by_date {
        let n = T::of_usize(works.len());
        let avg = |f: &dyn Fn(&PollMetrics<T>) -> T| works.iter().map(|w| f(&w.metrics)).sum::<T>() / n;
        let total: Amount = works.iter().map(|w| w.metrics.total_votes).sum();
        let ballots: Vec<&[FinalBallot]> = works.iter().map(|w| w.ballots.as_slice()).collect();
        daily.push(DailyMetrics {
            date,
            poll_count: works.len(),
            voters: works.iter().map(|w| w.metrics.voters).sum(),
            total_votes: total.to_real(),
            largest_share: avg(&|m| m.largest_share),
            largest_share_win: avg(&|m| m.largest_share_win),
            order: avg(&|m| m.order),
            speed: avg(&|m| m.speed_seconds),
            gini: daily_gini(&ballots, cfg.daily_gini),
            missing: false,
        });
    }

    if cfg.calendar == CalendarMode::FullCalendar && !daily.is_empty() {
        let first = daily[0].date;
        let last = daily[daily.len() - 1].date;
        let mut filled = Vec::new();
        let mut it = daily.into_iter().peekable();
        for date in first.iter_days().take_while(|d| *d <= last) {
            match it.peek() {
                Some(row) if row.date == date => filled.push(it.next().expect("peeked")),
                _ => filled.push(DailyMetrics::empty(date)),
            }
        }
        daily = filled;
    }

    let polls = by_date.into_values().flatten().map(|w| w.metrics).collect::<Vec<_>>();
    let mut polls = polls;
    polls.sort_by_key(|p| p.poll_id);
    Ok(MetricsRun { polls, daily, skipped })
}

pub const METRICS_HEADER: [&str; 10] = [
    "date",
    "poll_count",
    "voters",
    "total_votes",
    "largest_share",
    "largest_share_win",
    "order",
    "speed",
    "gini",
    "missing_flag",
];

pub fn metrics_csv<T: Real>(daily: &[DailyMetrics<T>]) -> String {
    csv_string(|w| {
        w.write_record(METRICS_HEADER)?;
        for d in daily {
            w.write_record([
                d.date.format("%Y-%m-%d").to_string(),
                d.poll_count.to_string(),
                d.voters.to_string(),
                d.total_votes.to_string(),
                d.largest_share.to_string(),
                d.largest_share_win.to_string(),
                d.order.to_string(),
                d.speed.to_string(),
                d.gini.to_string(),
                u8::from(d.missing).to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn poll_metrics_csv<T: Real>(polls: &[PollMetrics<T>]) -> String {
    csv_string(|w| {
        w.write_record([
            "poll_id",
            "date",
            "total_votes",
            "voters",
            "gini",
            "largest_votes",
            "largest_share",
            "ifwin",
            "largest_share_win",
            "order",
            "speed_seconds",
            "winner",
            "winner_tie",
            "breakdown_votes",
            "breakdown_voters",
            "breakdown_ratio",
        ])?;
        for p in polls {
            w.write_record([
                p.poll_id.to_string(),
                utc_date(p.deploy_timestamp).format("%Y-%m-%d").to_string(),
                p.total_votes.to_string(),
                p.voters.to_string(),
                p.gini.to_string(),
                p.largest_votes.to_string(),
                p.largest_share.to_string(),
                p.ifwin.to_string(),
                p.largest_share_win.to_string(),
                p.order.to_string(),
                p.speed_seconds.to_string(),
                p.winner.to_string(),
                u8::from(p.winner_tie).to_string(),
                p.breakdown_votes.to_string(),
                p.breakdown_voters.to_string(),
                p.breakdown_ratio.to_string(),
            ])?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::govdata::{Address, PollOption, PollRecord, VoteEvent};

    const DAY: i64 = 86_400;

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

    fn ev(poll_id: u64, voter: u64, option_id: u32, w: u64, ts: i64) -> VoteEvent {
        VoteEvent {
            poll_id,
            voter: Address::synthetic(voter),
            option_id,
            weight: Amount::from_whole(w),
            timestamp: ts,
        }
    }

    fn build(polls: Vec<PollRecord>, events: Vec<VoteEvent>) -> VoteLog {
        VoteLog::new(events, polls.into_iter().map(|p| (p.poll_id, p)).collect(), Default::default())
    }

    #[test]
    fn one_poll_day_equals_poll() {
        let log = build(
            vec![poll(1, 10 * DAY)],
            vec![ev(1, 1, 1, 60, 10 * DAY + 100), ev(1, 2, 2, 40, 10 * DAY + 300)],
        );
        let run = daily_metrics::<f64>(&log, &MetricsConfig::default()).unwrap();
        assert_eq!(run.daily.len(), 1);
        let (d, p) = (&run.daily[0], &run.polls[0]);
        assert_eq!(d.voters, p.voters);
        assert_eq!(d.total_votes, 100.0);
        assert_eq!(d.largest_share, p.largest_share);
        assert_eq!(d.order, p.order);
        assert_eq!(d.speed, 200.0);
        assert_eq!(d.poll_count, 1);
    }

    #[test]
    fn identical_polls_double_sums_keep_means() {
        let evs = |pid| vec![ev(pid, 1, 1, 60, 10 * DAY + 100), ev(pid, 2, 2, 40, 10 * DAY + 300)];
        let single = build(vec![poll(1, 10 * DAY)], evs(1));
        let double = build(vec![poll(1, 10 * DAY), poll(2, 10 * DAY)], [evs(1), evs(2)].concat());
        let cfg = MetricsConfig::default();
        let a = &daily_metrics::<f64>(&single, &cfg).unwrap().daily[0];
        let b = &daily_metrics::<f64>(&double, &cfg).unwrap().daily[0];
        assert_eq!(b.voters, 2 * a.voters);
        assert_eq!(b.total_votes, 2.0 * a.total_votes);
        for m in [Measure::LargestShare, Measure::LargestShareWin, Measure::Order, Measure::Speed] {
            assert_eq!(a.measure(m), b.measure(m), "{m}");
        }
    }

    #[test]
    fn calendar_modes() {
        let log = build(
            vec![poll(1, 10 * DAY), poll(2, 13 * DAY), poll(3, 12 * DAY)],
            vec![ev(1, 1, 1, 5, 10 * DAY + 1), ev(2, 1, 1, 5, 13 * DAY + 1)],
        );
        let drop = daily_metrics::<f64>(&log, &MetricsConfig::default()).unwrap();
        assert_eq!(drop.daily.len(), 2);
        assert_eq!(drop.skipped, vec![3]);
        let cfg = MetricsConfig {
            calendar: CalendarMode::FullCalendar,
            ..Default::default()
        };
        let full = daily_metrics::<f64>(&log, &cfg).unwrap();
        assert_eq!(full.daily.len(), 4);
        assert!(full.daily[1].missing && full.daily[2].missing);
        assert_eq!(full.daily[1].poll_count, 0);
        assert_eq!(full.daily[1].gini, 0.0);
        assert!(!full.daily[3].missing);
    }

    #[test]
    fn measure_names_roundtrip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert_eq!("total_votes".parse::<Measure>().unwrap(), Measure::TotalVotes);
    }

    #[test]
    fn metrics_csv_header() {
        let csv = metrics_csv::<f64>(&[]);
        assert_eq!(
            csv.trim_end(),
            "date,poll_count,voters,total_votes,largest_share,largest_share_win,order,speed,gini,missing_flag"
        );
    }
}
