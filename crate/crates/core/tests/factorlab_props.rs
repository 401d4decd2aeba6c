use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use govpulse_core::factorlab::{align, build_panel, daily_return, rolling_vol, VolMode};
use govpulse_core::govdata::{Category, FactorPanel, SeriesKey};
use proptest::prelude::*;

fn day(i: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Days::new(i)
}

fn series() -> impl Strategy<Value = BTreeMap<NaiveDate, f64>> {
    prop::collection::btree_map(0..200u64, -1e3..1e3f64, 0..120)
        .prop_map(|m| m.into_iter().map(|(k, v)| (day(k), v)).collect())
}

fn prices() -> impl Strategy<Value = Vec<Option<f64>>> {
    prop::collection::vec(prop::option::weighted(0.85, 1.0..500.0f64), 2..150)
}

proptest! {
    #[test]
    fn alignment_is_symmetric(a in series(), b in series()) {
        let ab = align(&a, &b);
        let ba = align(&b, &a);
        prop_assert_eq!(&ab.dates, &ba.dates);
        prop_assert_eq!(ab.y.len(), ab.dates.len());
        prop_assert_eq!(&ab.y, &ba.x);
        prop_assert!(ab.y.iter().chain(&ab.x).all(|v| v.is_finite()));
    }

    #[test]
    fn volatility_is_shift_equivariant(p in prices(), pad in 1..30usize, k in 2..20usize, log in any::<bool>()) {
        let mode = if log { VolMode::Log } else { VolMode::Simple };
        let base = rolling_vol(&daily_return(&p, mode).0, k).unwrap();
        let mut shifted = vec![None; pad];
        shifted.extend(p.iter().copied());
        let moved = rolling_vol(&daily_return(&shifted, mode).0, k).unwrap();
        prop_assert_eq!(&moved[pad..], &base[..]);
    }

    #[test]
    fn derived_panel_is_deterministic(p in prices()) {
        let mut raw = FactorPanel::<f64>::new();
        let key = SeriesKey::new("MKR", Category::Financial, "Price");
        for (i, v) in p.iter().enumerate() {
            if let Some(v) = v {
                raw.insert(day(i as u64), key.clone(), *v);
            }
        }
        prop_assume!(raw.cell_count() > 0);
        let a = build_panel(&raw, VolMode::Simple).unwrap();
        let b = build_panel(&raw, VolMode::Simple).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
    }
}
