use std::collections::BTreeSet;

use super::model::VoteLog;
use super::report::{Anomaly, AnomalyKind, Severity, Source, ValidationReport};

/// Full anomaly scan: ingestion findings plus pre-deploy votes, zero-weight
/// ballots, duplicate (poll, voter, timestamp) keys, polls without votes and
/// identities that never voted. Output ordering is deterministic.
pub fn validate_dataset(log: &VoteLog) -> ValidationReport {
    let mut report = log.ingest_report().clone();
    let mut keys = BTreeSet::new();
    for ev in log.events() {
        let poll = log.poll(ev.poll_id).expect("VoteLog events always resolve");
        if ev.timestamp < poll.deploy_timestamp {
            report.push(
                Anomaly::new(
                    Severity::Warning,
                    AnomalyKind::PreDeployVote,
                    Source::Dataset,
                    format!(
                        "{} voted at {} before deploy at {}",
                        ev.voter, ev.timestamp, poll.deploy_timestamp
                    ),
                )
                .with_poll(ev.poll_id),
            );
        }
        if ev.weight.is_zero() {
            report.push(
                Anomaly::new(
                    Severity::Warning,
                    AnomalyKind::ZeroWeight,
                    Source::Dataset,
                    format!("{} cast a zero-weight ballot", ev.voter),
                )
                .with_poll(ev.poll_id),
            );
        }
        if !keys.insert((ev.poll_id, &ev.voter, ev.timestamp)) {
            report.push(
                Anomaly::new(
                    Severity::Warning,
                    AnomalyKind::DuplicateKey,
                    Source::Dataset,
                    format!("{} has several records at {}", ev.voter, ev.timestamp),
                )
                .with_poll(ev.poll_id),
            );
        }
    }
    for id in log.poll_ids() {
        if log.poll_event_count(id) == 0 {
            report.push(
                Anomaly::new(Severity::Info, AnomalyKind::EmptyPoll, Source::Dataset, "poll has no votes")
                    .with_poll(id),
            );
        }
    }
    let voters: BTreeSet<_> = log.events().iter().map(|e| &e.voter).collect();
    for addr in log.identities().keys() {
        if !voters.contains(addr) {
            report.push(Anomaly::new(
                Severity::Info,
                AnomalyKind::UnknownIdentity,
                Source::Identities,
                format!("{addr} never voted"),
            ));
        }
    }
    report.sort();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::govdata::{Address, Amount, PollOption, PollRecord, VoteEvent};
    use std::collections::BTreeMap;

    fn log(events: Vec<(u64, u64, i64)>) -> VoteLog {
        let mut registry = BTreeMap::new();
        registry.insert(
            1,
            PollRecord {
                poll_id: 1,
                deploy_timestamp: 1000,
                title: String::new(),
                options: vec![PollOption { id: 1, label: "Yes".into() }],
                abstain_option_ids: Default::default(),
                category: None,
            },
        );
        let events = events
            .into_iter()
            .map(|(v, w, ts)| VoteEvent {
                poll_id: 1,
                voter: Address::synthetic(v),
                option_id: 1,
                weight: Amount::from_whole(w),
                timestamp: ts,
            })
            .collect();
        VoteLog::new(events, registry, BTreeMap::new())
    }

    #[test]
    fn clean_log_has_no_anomalies() {
        assert!(validate_dataset(&log(vec![(1, 5, 1100), (2, 3, 1200)])).anomalies.is_empty());
    }

    #[test]
    fn pre_deploy_vote_warns() {
        let r = validate_dataset(&log(vec![(1, 5, 900)]));
        assert_eq!(r.anomalies.len(), 1);
        assert_eq!(r.count(AnomalyKind::PreDeployVote), 1);
        assert!(!r.is_fatal());
    }

    #[test]
    fn zero_weight_warns() {
        let r = validate_dataset(&log(vec![(1, 0, 1100)]));
        assert_eq!(r.anomalies.len(), 1);
        assert_eq!(r.count(AnomalyKind::ZeroWeight), 1);
    }

    #[test]
    fn empty_poll_is_info() {
        let r = validate_dataset(&log(vec![]));
        assert_eq!(r.count(AnomalyKind::EmptyPoll), 1);
    }
}
