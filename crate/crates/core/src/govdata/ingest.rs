use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::amount::Amount;
use super::model::{Address, PollId, PollOption, PollRecord, VoteEvent, VoteLog};
use super::report::{Anomaly, AnomalyKind, Severity, Source, ValidationReport};
use crate::error::Result;
use crate::io::{check_header, csv_string, open_csv};

pub const VOTES_HEADER: [&str; 5] = ["poll_id", "voter", "option_id", "weight", "timestamp"];
pub const POLLS_HEADER: [&str; 5] = ["poll_id", "deploy_timestamp", "title", "options", "abstain_options"];
pub const IDENTITIES_HEADER: [&str; 2] = ["address", "name"];

/// Parses unix seconds or an ISO-8601 UTC timestamp.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp())
}

fn parse_event(rec: &csv::StringRecord) -> std::result::Result<VoteEvent, String> {
    if rec.len() != VOTES_HEADER.len() {
        return Err(format!("expected {} fields, found {}", VOTES_HEADER.len(), rec.len()));
    }
    let poll_id: PollId = rec[0].parse().map_err(|_| format!("bad poll_id `{}`", &rec[0]))?;
    if poll_id == 0 {
        return Err("poll_id must be positive".into());
    }
    let voter: Address = rec[1].parse()?;
    let option_id = rec[2].parse().map_err(|_| format!("bad option_id `{}`", &rec[2]))?;
    let weight: Amount = rec[3].parse().map_err(|e| format!("bad weight: {e}"))?;
    let timestamp = parse_timestamp(&rec[4]).ok_or_else(|| format!("bad timestamp `{}`", &rec[4]))?;
    Ok(VoteEvent {
        poll_id,
        voter,
        option_id,
        weight,
        timestamp,
    })
}

fn parse_poll(rec: &csv::StringRecord, width: usize) -> std::result::Result<PollRecord, String> {
    if rec.len() != width {
        return Err(format!("expected {width} fields, found {}", rec.len()));
    }
    let poll_id: PollId = rec[0].parse().map_err(|_| format!("bad poll_id `{}`", &rec[0]))?;
    if poll_id == 0 {
        return Err("poll_id must be positive".into());
    }
    let deploy_timestamp =
        parse_timestamp(&rec[1]).ok_or_else(|| format!("bad deploy_timestamp `{}`", &rec[1]))?;
    if deploy_timestamp <= 0 {
        return Err("deploy_timestamp must be positive".into());
    }
    let mut options = Vec::new();
    let mut seen = BTreeSet::new();
    for part in rec[3].split('|').filter(|p| !p.trim().is_empty()) {
        let (id, label) = part
            .split_once(':')
            .ok_or_else(|| format!("option `{part}` is not id:label"))?;
        let id = id.trim().parse().map_err(|_| format!("bad option id `{id}`"))?;
        if !seen.insert(id) {
            return Err(format!("duplicate option id {id}"));
        }
        options.push(PollOption {
            id,
            label: label.trim().to_string(),
        });
    }
    let mut abstain = BTreeSet::new();
    for part in rec[4].split('|').filter(|p| !p.trim().is_empty()) {
        abstain.insert(part.trim().parse().map_err(|_| format!("bad abstain id `{part}`"))?);
    }
    let category = rec.get(5).filter(|c| !c.is_empty()).map(str::to_string);
    Ok(PollRecord {
        poll_id,
        deploy_timestamp,
        title: rec[2].to_string(),
        options,
        abstain_option_ids: abstain,
        category,
    })
}

/// Loads the poll registry. Duplicate poll ids are fatal anomalies (first row kept).
pub fn load_polls(path: &Path, report: &mut ValidationReport) -> Result<BTreeMap<PollId, PollRecord>> {
    let mut rdr = open_csv(path)?;
    let extras = check_header(path, &mut rdr, &POLLS_HEADER, &["category"])?;
    let width = POLLS_HEADER.len() + extras.len();
    let mut registry = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        let parsed = rec.map_err(|e| e.to_string()).and_then(|r| parse_poll(&r, width));
        match parsed {
            Ok(poll) => {
                let id = poll.poll_id;
                if registry.contains_key(&id) {
                    report.push(
                        Anomaly::new(Severity::Fatal, AnomalyKind::DuplicatePoll, Source::Polls, format!("poll {id} listed twice"))
                            .at_line(line)
                            .with_poll(id),
                    );
                } else {
                    registry.insert(id, poll);
                }
            }
            Err(detail) => report.push(
                Anomaly::new(Severity::Warning, AnomalyKind::MalformedRow, Source::Polls, detail).at_line(line),
            ),
        }
    }
    Ok(registry)
}

pub fn load_identities(path: &Path, report: &mut ValidationReport) -> Result<BTreeMap<Address, String>> {
    let mut rdr = open_csv(path)?;
    check_header(path, &mut rdr, &IDENTITIES_HEADER, &[])?;
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        let parsed = rec.map_err(|e| e.to_string()).and_then(|r| {
            if r.len() != 2 {
                return Err(format!("expected 2 fields, found {}", r.len()));
            }
            Ok((r[0].parse::<Address>()?, r[1].to_string()))
        });
        match parsed {
            Ok((addr, name)) => {
                out.insert(addr, name);
            }
            Err(detail) => report.push(
                Anomaly::new(Severity::Warning, AnomalyKind::MalformedRow, Source::Identities, detail).at_line(line),
            ),
        }
    }
    Ok(out)
}

/// Loads votes, polls and (optionally) identities into a [`VoteLog`].
///
/// Missing files and malformed headers are errors; malformed rows are skipped
/// and recorded in [`VoteLog::ingest_report`], as are votes referencing polls
/// absent from the registry.
pub fn load_vote_log(votes_path: &Path, polls_path: &Path, identities_path: Option<&Path>) -> Result<VoteLog> {
    let mut report = ValidationReport::default();
    let registry = load_polls(polls_path, &mut report)?;
    let identities = match identities_path {
        Some(p) => load_identities(p, &mut report)?,
        None => BTreeMap::new(),
    };

    let mut rdr = open_csv(votes_path)?;
    check_header(votes_path, &mut rdr, &VOTES_HEADER, &[])?;
    let mut events = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        match rec.map_err(|e| e.to_string()).and_then(|r| parse_event(&r)) {
            Ok(ev) if !registry.contains_key(&ev.poll_id) => report.push(
                Anomaly::new(
                    Severity::Warning,
                    AnomalyKind::UnknownPoll,
                    Source::Votes,
                    format!("unknown poll {}", ev.poll_id),
                )
                .at_line(line)
                .with_poll(ev.poll_id),
            ),
            Ok(ev) => events.push(ev),
            Err(detail) => report.push(
                Anomaly::new(Severity::Warning, AnomalyKind::MalformedRow, Source::Votes, detail).at_line(line),
            ),
        }
    }
    Ok(VoteLog::new(events, registry, identities).with_ingest_report(report))
}

pub fn votes_csv(log: &VoteLog) -> String {
    csv_string(|w| {
        w.write_record(VOTES_HEADER)?;
        for e in log.events() {
            w.write_record([
                e.poll_id.to_string(),
                e.voter.to_string(),
                e.option_id.to_string(),
                e.weight.to_string(),
                e.timestamp.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn polls_csv(log: &VoteLog) -> String {
    let with_category = log.registry().values().any(|p| p.category.is_some());
    csv_string(|w| {
        let mut header: Vec<&str> = POLLS_HEADER.to_vec();
        if with_category {
            header.push("category");
        }
        w.write_record(&header)?;
        for p in log.registry().values() {
            let options = p
                .options
                .iter()
                .map(|o| format!("{}:{}", o.id, o.label))
                .collect::<Vec<_>>()
                .join("|");
            let abstain = p
                .abstain_option_ids
                .iter()
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join("|");
            let mut row = vec![p.poll_id.to_string(), p.deploy_timestamp.to_string(), p.title.clone(), options, abstain];
            if with_category {
                row.push(p.category.clone().unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn identities_csv(log: &VoteLog) -> String {
    csv_string(|w| {
        w.write_record(IDENTITIES_HEADER)?;
        for (addr, name) in log.identities() {
            w.write_record([addr.as_str(), name.as_str()])?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const POLLS: &str = "poll_id,deploy_timestamp,title,options,abstain_options\n1,1000,Poll one,0:Abstain|1:Yes|2:No,0\n";

    #[test]
    fn empty_votes_file() {
        let dir = tempfile::tempdir().unwrap();
        let v = write(dir.path(), "v.csv", "poll_id,voter,option_id,weight,timestamp\n");
        let p = write(dir.path(), "p.csv", POLLS);
        let log = load_vote_log(&v, &p, None).unwrap();
        assert_eq!(log.events().len(), 0);
        assert_eq!(log.registry().len(), 1);
        assert!(log.ingest_report().anomalies.is_empty());
    }

    #[test]
    fn unknown_poll_row_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let a = "0x00000000000000000000000000000000000000aa";
        let body = format!(
            "poll_id,voter,option_id,weight,timestamp\n1,{a},1,5,1100\n1,{a},2,5,1200\n1,0x00000000000000000000000000000000000000BB,1,3,1300\n999,{a},1,1,1400\n"
        );
        let v = write(dir.path(), "v.csv", &body);
        let p = write(dir.path(), "p.csv", POLLS);
        let log = load_vote_log(&v, &p, None).unwrap();
        assert_eq!(log.events().len(), 3);
        assert_eq!(log.ingest_report().count(AnomalyKind::UnknownPoll), 1);
        // lowercase normalization
        assert!(log.events().iter().any(|e| e.voter.as_str().ends_with("bb")));
    }

    #[test]
    fn malformed_rows_and_headers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", POLLS);
        let bad_header = write(dir.path(), "bad.csv", "poll,voter,option,weight,ts\n");
        assert!(matches!(
            load_vote_log(&bad_header, &p, None),
            Err(crate::GovError::Schema { .. })
        ));
        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_vote_log(&missing, &p, None), Err(crate::GovError::Io { .. })));

        let v = write(
            dir.path(),
            "v.csv",
            "poll_id,voter,option_id,weight,timestamp\n1,0xzz,1,5,1100\n1,0x00000000000000000000000000000000000000aa,1,-5,1100\n1,0x00000000000000000000000000000000000000aa,1,5,2021-10-22T00:00:00Z\n",
        );
        let log = load_vote_log(&v, &p, None).unwrap();
        assert_eq!(log.events().len(), 1);
        assert_eq!(log.events()[0].timestamp, 1_634_860_800);
        assert_eq!(log.ingest_report().rejected(Source::Votes), 2);
    }

    #[test]
    fn duplicate_poll_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.csv", &format!("{POLLS}1,2000,again,1:Yes,\n"));
        let v = write(dir.path(), "v.csv", "poll_id,voter,option_id,weight,timestamp\n");
        let log = load_vote_log(&v, &p, None).unwrap();
        assert!(log.ingest_report().is_fatal());
    }

    #[test]
    fn iso_timestamps() {
        assert_eq!(parse_timestamp("1634860800"), Some(1_634_860_800));
        assert_eq!(parse_timestamp("2021-10-22T00:00:00Z"), Some(1_634_860_800));
        assert_eq!(parse_timestamp("2021-10-22 00:00:00"), Some(1_634_860_800));
        assert_eq!(parse_timestamp("2021-10-22"), Some(1_634_860_800));
        assert_eq!(parse_timestamp("yesterday"), None);
    }
}
