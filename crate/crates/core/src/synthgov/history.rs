use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

use super::config::{DelaySpec, HoldingsModel, HoldingsSampling, PollsPerDay, SynthConfig};
use crate::error::Result;
use crate::govdata::{Address, Amount, OptionId, PollId, PollOption, PollRecord, VoteEvent, VoteLog};

pub const ABSTAIN: OptionId = 0;
const CHOICES: [OptionId; 2] = [1, 2];
const DAY: i64 = 86_400;

/// A generated history with the polls where the requested outcome for the
/// largest voter could not be arranged.
#[derive(Clone, Debug)]
pub struct SynthHistory {
    pub log: VoteLog,
    /// Polls whose largest voter was meant to lose but outweighs everyone else.
    pub infeasible: Vec<PollId>,
    /// Holding of voter `i` (address `Address::synthetic(i)`).
    pub holdings: Vec<Amount>,
}

/// Deterministic history for `cfg` (see [`gen_history_detailed`]).
pub fn gen_history(cfg: &SynthConfig) -> Result<VoteLog> {
    Ok(gen_history_detailed(cfg)?.log)
}

fn quantile(cfg: &SynthConfig, u: f64) -> f64 {
    let tail = (1.0 - u).powf(-1.0 / cfg.holdings_alpha);
    match cfg.holdings_model {
        HoldingsModel::Lomax => cfg.holdings_scale * (tail - 1.0),
        HoldingsModel::Pareto => cfg.holdings_scale * tail,
    }
}

/// Rounds to 1e-6 tokens so that written files stay short; never zero.
fn to_amount(v: f64) -> Amount {
    let micro = (v * 1e6).round().max(1.0) as i128;
    Amount::from_base_units(micro * 1_000_000_000_000)
}

fn holdings(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<Amount> {
    let n = cfg.voter_pool;
    let mut levels: Vec<f64> = match cfg.holdings_sampling {
        HoldingsSampling::Stratified => (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        HoldingsSampling::Iid => (0..n).map(|_| rng.random::<f64>()).collect(),
    };
    levels.shuffle(rng);
    levels.into_iter().map(|u| to_amount(quantile(cfg, u))).collect()
}

fn participation(cfg: &SynthConfig, holdings: &[Amount]) -> Vec<f64> {
    let mut sorted: Vec<f64> = holdings.iter().map(|h| h.to_f64()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = crate::stats::median(&sorted);
    let base = 1.0 - cfg.participation_rate;
    holdings
        .iter()
        .map(|h| {
            let distance = (h.to_f64() / median).ln().abs();
            1.0 - base.powf((cfg.participation_skew * distance).exp())
        })
        .collect()
}

fn delay(spec: &DelaySpec, rng: &mut ChaCha8Rng) -> i64 {
    let s = match *spec {
        DelaySpec::Constant { seconds } => seconds,
        DelaySpec::Exponential { mean } => Exp::new(1.0 / mean).expect("validated mean").sample(rng),
        DelaySpec::Uniform { min, max } => min + (max - min) * rng.random::<f64>(),
    };
    s.floor() as i64
}

struct Ballot {
    voter: usize,
    option: OptionId,
    weight: Amount,
    ts: i64,
}

fn winner(ballots: &[Ballot]) -> OptionId {
    let mut totals: BTreeMap<OptionId, Amount> = BTreeMap::new();
    for b in ballots {
        *totals.entry(b.option).or_insert(Amount::ZERO) += b.weight;
    }
    // BTreeMap iterates ascending, so the first maximum is the smallest id.
    let mut best = (ABSTAIN, Amount::ZERO);
    for (i, (&opt, &w)) in totals.iter().enumerate() {
        if i == 0 || w > best.1 {
            best = (opt, w);
        }
    }
    best.0
}

/// Moves the smallest other voters onto the option that makes the largest
/// voter win (or lose). Returns false when losing cannot be arranged.
fn force_outcome(ballots: &mut [Ballot], largest: usize, want_win: bool) -> bool {
    let target = ballots[largest].option;
    let rival = if target == CHOICES[0] { CHOICES[1] } else { CHOICES[0] };
    let dest = if want_win { target } else { rival };
    let done = |bs: &[Ballot]| (winner(bs) == target) == want_win;
    if done(ballots) {
        return true;
    }
    let mut order: Vec<usize> = (0..ballots.len()).filter(|&i| i != largest).collect();
    order.sort_by_key(|&i| (ballots[i].weight, ballots[i].voter));
    let original: Vec<OptionId> = ballots.iter().map(|b| b.option).collect();
    for i in order {
        if ballots[i].option != dest {
            ballots[i].option = dest;
            if done(ballots) {
                return true;
            }
        }
    }
    for (b, o) in ballots.iter_mut().zip(original) {
        b.option = o;
    }
    false
}

fn options() -> Vec<PollOption> {
    vec![
        PollOption { id: ABSTAIN, label: "Abstain".into() },
        PollOption { id: 1, label: "Yes".into() },
        PollOption { id: 2, label: "No".into() },
    ]
}

/// Generates polls day by day from one seeded stream. Every participant votes
/// their full holding; some revise from an earlier different choice. The
/// largest participant's option is then made to win with probability
/// `largest_wins_prob` and to lose otherwise, by switching the smallest
/// voters' final choices.
pub fn gen_history_detailed(cfg: &SynthConfig) -> Result<SynthHistory> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let holdings = holdings(cfg, &mut rng);
    let probs = participation(cfg, &holdings);
    let addresses: Vec<Address> = (0..cfg.voter_pool).map(|i| Address::synthetic(i as u64)).collect();

    let mut registry = BTreeMap::new();
    let mut events = Vec::new();
    let mut infeasible = Vec::new();
    let mut next_id: PollId = 1;
    for day in 0..cfg.days {
        let count = match cfg.polls_per_day {
            PollsPerDay::Constant { count } => count,
            PollsPerDay::Poisson { mean } => Poisson::new(mean).expect("validated mean").sample(&mut rng) as usize,
        };
        for j in 0..count {
            let poll_id = next_id;
            next_id += 1;
            let deploy = cfg.start_timestamp + day as i64 * DAY + j as i64 * 3600;
            registry.insert(
                poll_id,
                PollRecord {
                    poll_id,
                    deploy_timestamp: deploy,
                    title: format!("Synthetic poll {poll_id}"),
                    options: options(),
                    abstain_option_ids: [ABSTAIN].into(),
                    category: None,
                },
            );

            let mut voters: Vec<usize> = (0..cfg.voter_pool).filter(|&i| rng.random::<f64>() < probs[i]).collect();
            if voters.is_empty() {
                voters.push(rng.random_range(0..cfg.voter_pool));
            }
            let mut ballots = Vec::with_capacity(voters.len());
            let mut revisions = Vec::new();
            for v in voters {
                let option = if rng.random::<f64>() < cfg.abstain_rate {
                    ABSTAIN
                } else {
                    CHOICES[rng.random_range(0..CHOICES.len())]
                };
                let d = delay(&cfg.vote_delay, &mut rng).max(0);
                if d >= 2 && rng.random::<f64>() < cfg.revision_rate {
                    let earlier = rng.random_range(0..d);
                    revisions.push((v, earlier));
                }
                ballots.push(Ballot {
                    voter: v,
                    option,
                    weight: holdings[v],
                    ts: deploy + d,
                });
            }
            let largest = (0..ballots.len())
                .min_by_key(|&i| (std::cmp::Reverse(ballots[i].weight), ballots[i].ts, ballots[i].voter))
                .expect("at least one ballot");
            let want_win = rng.random::<f64>() < cfg.largest_wins_prob;
            if !force_outcome(&mut ballots, largest, want_win) {
                infeasible.push(poll_id);
            }

            let final_option: BTreeMap<usize, OptionId> = ballots.iter().map(|b| (b.voter, b.option)).collect();
            for (v, earlier) in revisions {
                let fin = final_option[&v];
                let first = if fin == CHOICES[0] { CHOICES[1] } else { CHOICES[0] };
                events.push(VoteEvent {
                    poll_id,
                    voter: addresses[v].clone(),
                    option_id: first,
                    weight: holdings[v],
                    timestamp: deploy + earlier,
                });
            }
            for b in ballots {
                events.push(VoteEvent {
                    poll_id,
                    voter: addresses[b.voter].clone(),
                    option_id: b.option,
                    weight: b.weight,
                    timestamp: b.ts,
                });
            }
        }
    }
    Ok(SynthHistory {
        log: VoteLog::new(events, registry, BTreeMap::new()),
        infeasible,
        holdings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::govdata::{final_ballots, winning_option, BallotRule};

    fn small() -> SynthConfig {
        SynthConfig {
            days: 30,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = gen_history(&small()).unwrap();
        let b = gen_history(&small()).unwrap();
        assert_eq!(a, b);
        let c = gen_history(&SynthConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_participation() {
        let cfg = SynthConfig {
            days: 10,
            voter_pool: 5,
            participation_rate: 1.0,
            ..Default::default()
        };
        let log = gen_history(&cfg).unwrap();
        for id in log.poll_ids() {
            assert_eq!(final_ballots(&log, id, BallotRule::Last).unwrap().len(), 5);
        }
    }

    #[test]
    fn single_voter_cannot_lose() {
        let cfg = SynthConfig {
            days: 20,
            voter_pool: 1,
            largest_wins_prob: 0.0,
            ..Default::default()
        };
        let h = gen_history_detailed(&cfg).unwrap();
        assert_eq!(h.infeasible.len(), 20);
    }

    #[test]
    fn forcing_respected() {
        for (p, want) in [(1.0, true), (0.0, false)] {
            let cfg = SynthConfig {
                days: 40,
                largest_wins_prob: p,
                ..Default::default()
            };
            let h = gen_history_detailed(&cfg).unwrap();
            for id in h.log.poll_ids() {
                let b = final_ballots(&h.log, id, BallotRule::Last).unwrap();
                let top = crate::centrality::largest_ballot(&b).unwrap();
                let won = winning_option(&b).unwrap().option_id == top.option_id;
                assert!(won == want || h.infeasible.contains(&id), "poll {id}");
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(gen_history(&SynthConfig { holdings_alpha: 1.0, ..small() }).is_err());
        assert!(gen_history(&SynthConfig { revision_rate: 1.5, ..small() }).is_err());
    }
}
