#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use govpulse_core::govdata::{Address, Amount, PollOption, PollRecord, VoteEvent, VoteLog};
use proptest::prelude::*;

pub const DEPLOY: i64 = 1_600_000_000;

pub fn poll(id: u64, deploy: i64) -> PollRecord {
    PollRecord {
        poll_id: id,
        deploy_timestamp: deploy,
        title: format!("Poll {id}"),
        options: (0..3).map(|o| PollOption { id: o as u32, label: format!("option {o}") }).collect(),
        abstain_option_ids: BTreeSet::from([0]),
        category: None,
    }
}

/// `(poll, voter, option, weight in micro-tokens, seconds after deploy)`.
pub type RawEvent = (u64, u64, u32, u64, i64);

pub fn raw_events(polls: u64, voters: u64, max_len: usize) -> impl Strategy<Value = Vec<RawEvent>> {
    prop::collection::vec((1..=polls, 0..voters, 0..3u32, 1..5_000_000_000u64, 0..400_000i64), 1..max_len)
}

pub fn build_log(polls: u64, raw: &[RawEvent]) -> VoteLog {
    let registry: BTreeMap<_, _> = (1..=polls).map(|p| (p, poll(p, DEPLOY + p as i64 * 86_400))).collect();
    let events = raw
        .iter()
        .map(|&(p, v, o, w, dt)| VoteEvent {
            poll_id: p,
            voter: Address::synthetic(v),
            option_id: o,
            weight: Amount::from_base_units(w as i128 * 1_000_000_000_000),
            timestamp: DEPLOY + p as i64 * 86_400 + dt,
        })
        .collect();
    VoteLog::new(events, registry, BTreeMap::new())
}
