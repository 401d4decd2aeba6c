use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::amount::Amount;
use super::report::{Anomaly, AnomalyKind, Severity, Source, ValidationReport};

pub type PollId = u64;
pub type OptionId = u32;

/// Lowercase `0x`-prefixed 20-byte hex address.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Address(String);

impl Address {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Deterministic synthetic address for index `i`.
    pub fn synthetic(i: u64) -> Self {
        Address(format!("0x{:040x}", i))
    }
}

impl FromStr for Address {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let hex = lower
            .strip_prefix("0x")
            .ok_or_else(|| format!("address `{s}` lacks 0x prefix"))?;
        if hex.len() != 40 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("address `{s}` is not 40 hex digits"));
        }
        Ok(Address(lower))
    }
}

impl TryFrom<String> for Address {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Address> for String {
    fn from(a: Address) -> String {
        a.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One weighted ballot action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteEvent {
    pub poll_id: PollId,
    pub voter: Address,
    pub option_id: OptionId,
    pub weight: Amount,
    /// Unix seconds, UTC.
    pub timestamp: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollOption {
    pub id: OptionId,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollRecord {
    pub poll_id: PollId,
    pub deploy_timestamp: i64,
    pub title: String,
    pub options: Vec<PollOption>,
    pub abstain_option_ids: BTreeSet<OptionId>,
    pub category: Option<String>,
}

impl PollRecord {
    pub fn is_abstain(&self, option: OptionId) -> bool {
        self.abstain_option_ids.contains(&option)
    }
}

/// Immutable, chronologically ordered voting history plus its poll registry.
#[derive(Clone, Debug, Default)]
pub struct VoteLog {
    events: Vec<VoteEvent>,
    registry: BTreeMap<PollId, PollRecord>,
    identities: BTreeMap<Address, String>,
    ingest_report: ValidationReport,
    by_poll: BTreeMap<PollId, Vec<usize>>,
}

impl PartialEq for VoteLog {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
            && self.registry == other.registry
            && self.identities == other.identities
    }
}

impl VoteLog {
    /// Builds a log from events in input order.
    ///
    /// Events are stably sorted by timestamp, so equal timestamps keep input
    /// order. Events whose poll is not in the registry are dropped and
    /// recorded in the ingest report.
    pub fn new(
        events: Vec<VoteEvent>,
        registry: BTreeMap<PollId, PollRecord>,
        identities: BTreeMap<Address, String>,
    ) -> Self {
        let mut report = ValidationReport::default();
        let mut kept = Vec::with_capacity(events.len());
        for ev in events {
            if registry.contains_key(&ev.poll_id) {
                kept.push(ev);
            } else {
                report.push(Anomaly::new(
                    Severity::Warning,
                    AnomalyKind::UnknownPoll,
                    Source::Votes,
                    format!("event by {} references unknown poll {}", ev.voter, ev.poll_id),
                ).with_poll(ev.poll_id));
            }
        }
        let mut log = VoteLog {
            events: kept,
            registry,
            identities,
            ingest_report: report,
            by_poll: BTreeMap::new(),
        };
        log.reindex();
        log
    }

    fn reindex(&mut self) {
        self.events.sort_by_key(|e| e.timestamp);
        self.by_poll.clear();
        for (i, ev) in self.events.iter().enumerate() {
            self.by_poll.entry(ev.poll_id).or_default().push(i);
        }
        self.ingest_report.events = self.events.len();
        self.ingest_report.polls = self.registry.len();
        self.ingest_report.voters = self.events.iter().map(|e| &e.voter).collect::<BTreeSet<_>>().len();
    }

    pub(crate) fn with_ingest_report(mut self, mut report: ValidationReport) -> Self {
        report.anomalies.append(&mut self.ingest_report.anomalies);
        report.events = self.ingest_report.events;
        report.polls = self.ingest_report.polls;
        report.voters = self.ingest_report.voters;
        report.sort();
        self.ingest_report = report;
        self
    }

    pub fn events(&self) -> &[VoteEvent] {
        &self.events
    }

    pub fn registry(&self) -> &BTreeMap<PollId, PollRecord> {
        &self.registry
    }

    pub fn poll(&self, id: PollId) -> Option<&PollRecord> {
        self.registry.get(&id)
    }

    pub fn identities(&self) -> &BTreeMap<Address, String> {
        &self.identities
    }

    pub fn identity(&self, address: &Address) -> Option<&str> {
        self.identities.get(address).map(String::as_str)
    }

    /// Anomalies collected while loading (skipped rows, unknown polls).
    pub fn ingest_report(&self) -> &ValidationReport {
        &self.ingest_report
    }

    /// Chronological events of one poll.
    pub fn poll_events(&self, id: PollId) -> impl Iterator<Item = &VoteEvent> + '_ {
        self.by_poll
            .get(&id)
            .into_iter()
            .flat_map(move |idx| idx.iter().map(move |&i| &self.events[i]))
    }

    pub fn poll_event_count(&self, id: PollId) -> usize {
        self.by_poll.get(&id).map_or(0, Vec::len)
    }

    pub fn poll_ids(&self) -> impl Iterator<Item = PollId> + '_ {
        self.registry.keys().copied()
    }
}

/// A voter's counted ballot in one poll.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalBallot {
    pub voter: Address,
    pub option_id: OptionId,
    pub weight: Amount,
    pub final_timestamp: i64,
    /// 1-based position of the counted record in the poll's full history.
    pub history_order_index: usize,
    /// 1-based position of the voter's first record in the poll's history.
    pub first_order_index: usize,
    /// Number of records in the poll's history.
    pub history_len: usize,
    /// The counted record shared its timestamp with another record by the same voter.
    pub same_time_tie: bool,
}
