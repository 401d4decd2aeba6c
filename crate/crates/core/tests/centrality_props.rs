mod common;

use common::{build_log, raw_events};
use govpulse_core::centrality::{
    daily_metrics, largest_voter_stats, lorenz_points, mle_gini, poll_gini, CalendarMode, MetricsConfig, OrderRule,
};
use govpulse_core::govdata::{Address, Amount, FinalBallot};
use govpulse_core::synthgov::gini_oracle;
use proptest::prelude::*;

fn ballots(units: &[u64]) -> Vec<FinalBallot> {
    units
        .iter()
        .enumerate()
        .map(|(i, &w)| FinalBallot {
            voter: Address::synthetic(i as u64),
            option_id: (i % 2) as u32 + 1,
            weight: Amount::from_base_units(w as i128),
            final_timestamp: 100 + i as i64,
            history_order_index: i + 1,
            first_order_index: i + 1,
            history_len: units.len(),
            same_time_tie: false,
        })
        .collect()
}

fn weights() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1..1_000_000_000_000u64, 2..64)
}

proptest! {
    #[test]
    fn gini_matches_sorted_rank_oracle(w in weights()) {
        let g: f64 = poll_gini(&ballots(&w));
        let oracle = gini_oracle(&w.iter().map(|&v| v as f64).collect::<Vec<_>>());
        prop_assert!((g - oracle).abs() <= 1e-10);
        prop_assert!((0.0..1.0).contains(&g));
    }

    #[test]
    fn gini_and_share_are_scale_invariant(w in weights(), c in 1..1000u64) {
        let scaled: Vec<u64> = w.iter().map(|v| v * c).collect();
        let (a, b) = (ballots(&w), ballots(&scaled));
        prop_assert!((poll_gini::<f64>(&a) - poll_gini::<f64>(&b)).abs() <= 1e-12);
        let sa = largest_voter_stats::<f64>(&a, 1, OrderRule::Last).unwrap().share;
        let sb = largest_voter_stats::<f64>(&b, 1, OrderRule::Last).unwrap().share;
        prop_assert!((sa - sb).abs() <= 1e-12);
    }

    #[test]
    fn transfer_to_richer_voter_never_lowers_gini(w in weights(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), frac in 0.0..1.0f64) {
        let (i, j) = (i.index(w.len()), j.index(w.len()));
        prop_assume!(i != j && w[i] <= w[j]);
        let eps = ((w[i] - 1) as f64 * frac) as u64;
        let mut moved = w.clone();
        moved[i] -= eps;
        moved[j] += eps;
        prop_assert!(poll_gini::<f64>(&ballots(&moved)) >= poll_gini::<f64>(&ballots(&w)) - 1e-12);
    }

    #[test]
    fn metrics_ignore_ballot_order(w in weights()) {
        let b = ballots(&w);
        let mut rev = b.clone();
        rev.reverse();
        prop_assert_eq!(poll_gini::<f64>(&b), poll_gini::<f64>(&rev));
        let x = largest_voter_stats::<f64>(&b, 1, OrderRule::Last).unwrap();
        let y = largest_voter_stats::<f64>(&rev, 1, OrderRule::Last).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn daily_gini_grows_with_concentration(y in 1.0..100.0f64, k in 1..50usize, r1 in 1.01..50.0f64, r2 in 1.01..50.0f64) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let pool = |ratio: f64| {
            let mut v = vec![y; k];
            v.push(ratio * y);
            mle_gini(&v)
        };
        prop_assert!(pool(hi) >= pool(lo));
    }

    #[test]
    fn lorenz_is_convex_and_below_diagonal(w in prop::collection::vec(0.0..1e6f64, 1..80)) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        let l = lorenz_points(&w).unwrap();
        prop_assert_eq!(l.points[0], (0.0, 0.0));
        prop_assert_eq!(*l.points.last().unwrap(), (1.0, 1.0));
        for p in &l.points {
            prop_assert!(p.1 <= p.0 + 1e-12);
        }
        let slopes: Vec<f64> = l.points.windows(2).map(|s| (s[1].1 - s[0].1) / (s[1].0 - s[0].0)).collect();
        prop_assert!(slopes.windows(2).all(|s| s[1] >= s[0] - 1e-9));
    }

    #[test]
    fn poll_and_daily_metrics_stay_in_bounds(raw in raw_events(5, 15, 80), full in any::<bool>()) {
        let log = build_log(5, &raw);
        let cfg = MetricsConfig {
            calendar: if full { CalendarMode::FullCalendar } else { CalendarMode::DropMissing },
            ..Default::default()
        };
        let run = daily_metrics::<f64>(&log, &cfg).unwrap();
        for p in &run.polls {
            prop_assert!((0.0..1.0).contains(&p.gini));
            prop_assert!(p.largest_share > 0.0 && p.largest_share <= 1.0);
            prop_assert!(p.order > 0.0 && p.order <= 1.0);
            prop_assert!(p.largest_share_win >= 0.0 && p.largest_share_win <= p.largest_share);
            prop_assert_eq!(p.largest_share_win, p.largest_share * f64::from(p.ifwin));
            prop_assert!(p.voters >= 1);
        }
        for d in &run.daily {
            for v in [d.largest_share, d.largest_share_win, d.order, d.gini] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if d.missing {
                prop_assert!(full && d.poll_count == 0 && d.voters == 0 && d.gini == 0.0);
            } else {
                prop_assert!(d.poll_count >= 1);
            }
        }
    }
}
