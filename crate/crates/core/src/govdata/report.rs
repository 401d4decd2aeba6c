use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::PollId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Fatal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyKind {
    MalformedRow,
    UnknownPoll,
    DuplicatePoll,
    PreDeployVote,
    ZeroWeight,
    DuplicateKey,
    EmptyPoll,
    UnknownIdentity,
    UnknownFactor,
    BadDate,
    NonPositivePrice,
    DerivedOverride,
}

impl AnomalyKind {
    pub fn label(self) -> &'static str {
        match self {
            AnomalyKind::MalformedRow => "malformed row",
            AnomalyKind::UnknownPoll => "unknown poll",
            AnomalyKind::DuplicatePoll => "duplicate poll",
            AnomalyKind::PreDeployVote => "pre-deploy vote",
            AnomalyKind::ZeroWeight => "zero weight",
            AnomalyKind::DuplicateKey => "duplicate key",
            AnomalyKind::EmptyPoll => "empty poll",
            AnomalyKind::UnknownIdentity => "unknown identity",
            AnomalyKind::UnknownFactor => "unknown factor",
            AnomalyKind::BadDate => "bad date",
            AnomalyKind::NonPositivePrice => "non-positive price",
            AnomalyKind::DerivedOverride => "derived override",
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Votes,
    Polls,
    Identities,
    Factors,
    Dataset,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Anomaly {
    pub source: Source,
    /// 1-based data row number in the source file (header excluded).
    pub line: Option<u64>,
    pub poll_id: Option<PollId>,
    pub kind: AnomalyKind,
    pub severity: Severity,
    pub detail: String,
}

impl Anomaly {
    pub fn new(severity: Severity, kind: AnomalyKind, source: Source, detail: impl Into<String>) -> Self {
        Anomaly {
            source,
            line: None,
            poll_id: None,
            kind,
            severity,
            detail: detail.into(),
        }
    }

    pub fn at_line(mut self, line: u64) -> Self {
        self.line = Some(line);
        self
    }

    pub fn with_poll(mut self, poll: PollId) -> Self {
        self.poll_id = Some(poll);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub events: usize,
    pub polls: usize,
    pub voters: usize,
    pub anomalies: Vec<Anomaly>,
}

impl ValidationReport {
    pub fn push(&mut self, a: Anomaly) {
        self.anomalies.push(a);
    }

    pub fn sort(&mut self) {
        self.anomalies.sort();
    }

    pub fn is_fatal(&self) -> bool {
        self.anomalies.iter().any(|a| a.severity == Severity::Fatal)
    }

    pub fn count(&self, kind: AnomalyKind) -> usize {
        self.anomalies.iter().filter(|a| a.kind == kind).count()
    }

    /// Rows from `source` that were rejected at ingestion.
    pub fn rejected(&self, source: Source) -> usize {
        self.anomalies
            .iter()
            .filter(|a| {
                a.source == source
                    && matches!(
                        a.kind,
                        AnomalyKind::MalformedRow | AnomalyKind::UnknownPoll | AnomalyKind::BadDate
                    )
            })
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["source", "line", "poll_id", "kind", "severity", "detail"])
            .expect("in-memory write");
        for a in &self.anomalies {
            w.write_record([
                format!("{:?}", a.source).to_lowercase(),
                a.line.map(|l| l.to_string()).unwrap_or_default(),
                a.poll_id.map(|p| p.to_string()).unwrap_or_default(),
                a.kind.label().to_string(),
                format!("{:?}", a.severity).to_lowercase(),
                a.detail.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}
