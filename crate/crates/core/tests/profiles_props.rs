mod common;

use std::collections::BTreeSet;

use common::{build_log, raw_events};
use govpulse_core::centrality::{daily_metrics, MetricsConfig};
use govpulse_core::govdata::{Amount, BallotRule};
use govpulse_core::profiles::{poll_descriptives, rank_voters, voter_profiles, RankCriterion};
use proptest::prelude::*;

fn sorted_median(mut v: Vec<f64>) -> (f64, f64, f64) {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let med = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
    (v[0], med, v[n - 1])
}

proptest! {
    #[test]
    fn vote_totals_are_conserved(raw in raw_events(6, 20, 120), first in any::<bool>()) {
        let log = build_log(6, &raw);
        let rule = if first { BallotRule::First } else { BallotRule::Last };
        let profiles = voter_profiles(&log, rule).unwrap();
        let cfg = MetricsConfig { ballot: rule, ..Default::default() };
        let run = daily_metrics::<f64>(&log, &cfg).unwrap();
        let by_voter: Amount = profiles.iter().map(|p| p.total_votes).sum();
        let by_poll: Amount = run.polls.iter().map(|p| p.total_votes).sum();
        prop_assert_eq!(by_voter, by_poll);
        for p in &profiles {
            prop_assert!(p.highest_single_vote <= p.total_votes);
            prop_assert!(p.involved_polls >= 1);
        }
    }

    #[test]
    fn ranking_is_a_prefix_of_a_permutation(raw in raw_events(4, 25, 80), n in 0..40usize) {
        let log = build_log(4, &raw);
        let profiles = voter_profiles(&log, BallotRule::Last).unwrap();
        for c in RankCriterion::ALL {
            let top = rank_voters(&profiles, c, n);
            prop_assert_eq!(top.len(), n.min(profiles.len()));
            let distinct: BTreeSet<_> = top.iter().map(|p| &p.address).collect();
            prop_assert_eq!(distinct.len(), top.len());
            prop_assert!(top.iter().all(|p| profiles.contains(p)));
        }
    }

    #[test]
    fn poll_descriptives_match_sort_oracle(raw in raw_events(8, 12, 100)) {
        let log = build_log(8, &raw);
        let run = daily_metrics::<f64>(&log, &MetricsConfig::default()).unwrap();
        let d = poll_descriptives(&run.polls).unwrap();
        let checks: [(&str, Vec<f64>); 2] = [
            ("Total votes", run.polls.iter().map(|p| p.total_votes.to_f64()).collect()),
            ("Largest voter share", run.polls.iter().map(|p| p.largest_share).collect()),
        ];
        for (name, values) in checks {
            let s = d.row(name).unwrap();
            let (min, med, max) = sorted_median(values);
            prop_assert!((s.min - min).abs() <= 1e-9 * min.abs().max(1.0));
            prop_assert!((s.median - med).abs() <= 1e-9 * med.abs().max(1.0));
            prop_assert!((s.max - max).abs() <= 1e-9 * max.abs().max(1.0));
            prop_assert!(s.min <= s.median && s.median <= s.max);
        }
    }
}
