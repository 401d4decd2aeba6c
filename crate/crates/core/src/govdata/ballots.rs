use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::amount::Amount;
use super::model::{Address, FinalBallot, OptionId, PollId, VoteEvent, VoteLog};
use crate::error::{GovError, Result};

/// Which of a voter's records in a poll is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallotRule {
    First,
    #[default]
    Last,
}

impl FromStr for BallotRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "first" => Ok(BallotRule::First),
            "last" => Ok(BallotRule::Last),
            _ => Err(format!("unknown ballot rule `{s}` (expected first|last)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winner {
    pub option_id: OptionId,
    /// Another option had the same total; the smallest id was chosen.
    pub tie: bool,
}

struct VoterTrack<'a> {
    first_pos: usize,
    counted: &'a VoteEvent,
    counted_pos: usize,
    tie: bool,
}

/// Canonical pick among records sharing a timestamp, independent of file order.
fn prefer(a: &VoteEvent, b: &VoteEvent) -> bool {
    (a.weight, std::cmp::Reverse(a.option_id)) > (b.weight, std::cmp::Reverse(b.option_id))
}

/// One counted ballot per voter of `poll_id`, sorted by weight descending then
/// final timestamp ascending (then address).
pub fn final_ballots(log: &VoteLog, poll_id: PollId, rule: BallotRule) -> Result<Vec<FinalBallot>> {
    if log.poll(poll_id).is_none() {
        return Err(GovError::UnknownPoll(poll_id));
    }
    let n = log.poll_event_count(poll_id);
    let mut tracks: BTreeMap<&Address, VoterTrack<'_>> = BTreeMap::new();
    for (pos, ev) in log.poll_events(poll_id).enumerate() {
        match tracks.get_mut(&ev.voter) {
            None => {
                tracks.insert(
                    &ev.voter,
                    VoterTrack {
                        first_pos: pos,
                        counted: ev,
                        counted_pos: pos,
                        tie: false,
                    },
                );
            }
            Some(t) => {
                if ev.timestamp == t.counted.timestamp {
                    t.tie = true;
                    if prefer(ev, t.counted) {
                        t.counted = ev;
                        t.counted_pos = pos;
                    }
                } else if rule == BallotRule::Last {
                    // events are chronological, so a different timestamp is later
                    t.counted = ev;
                    t.counted_pos = pos;
                    t.tie = false;
                }
            }
        }
    }
    let mut out: Vec<FinalBallot> = tracks
        .into_iter()
        .map(|(voter, t)| FinalBallot {
            voter: voter.clone(),
            option_id: t.counted.option_id,
            weight: t.counted.weight,
            final_timestamp: t.counted.timestamp,
            history_order_index: t.counted_pos + 1,
            first_order_index: t.first_pos + 1,
            history_len: n,
            same_time_tie: t.tie,
        })
        .collect();
    out.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then(a.final_timestamp.cmp(&b.final_timestamp))
            .then_with(|| a.voter.cmp(&b.voter))
    });
    Ok(out)
}

/// Option with the largest summed weight; ties go to the smallest option id.
pub fn winning_option(ballots: &[FinalBallot]) -> Result<Winner> {
    winning_option_excluding(ballots, &BTreeSet::new())
}

/// As [`winning_option`], ignoring `excluded` options unless nothing else was chosen.
pub fn winning_option_excluding(ballots: &[FinalBallot], excluded: &BTreeSet<OptionId>) -> Result<Winner> {
    if ballots.is_empty() {
        return Err(GovError::NoVotes);
    }
    let mut tally: BTreeMap<OptionId, Amount> = BTreeMap::new();
    for b in ballots {
        *tally.entry(b.option_id).or_default() += b.weight;
    }
    if tally.keys().any(|k| !excluded.contains(k)) {
        tally.retain(|k, _| !excluded.contains(k));
    }
    let best = *tally.values().max().expect("non-empty tally");
    let mut leaders = tally.iter().filter(|(_, &w)| w == best).map(|(&k, _)| k);
    let option_id = leaders.next().expect("at least one leader");
    Ok(Winner {
        option_id,
        tie: leaders.next().is_some(),
    })
}
