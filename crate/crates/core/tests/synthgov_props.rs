use govpulse_core::centrality::{daily_metrics, metrics_csv, MetricsConfig};
use govpulse_core::econ::{ols_grid_csv, run_factor_matrix, GridOptions};
use govpulse_core::factorlab::{build_panel, AnalysisPanel, VolMode};
use govpulse_core::govdata::votes_csv;
use govpulse_core::pipeline::with_threads;
use govpulse_core::synthgov::{gen_history, gen_panel, PanelPlan, SynthConfig};
use proptest::prelude::*;

fn mean_largest_share(alpha: f64) -> f64 {
    let mut total = 0.0;
    for seed in 0..50 {
        let cfg = SynthConfig { seed, days: 120, holdings_alpha: alpha, ..Default::default() };
        let run = daily_metrics::<f64>(&gen_history(&cfg).unwrap(), &MetricsConfig::default()).unwrap();
        total += run.polls.iter().map(|p| p.largest_share).sum::<f64>() / run.polls.len() as f64;
    }
    total / 50.0
}

#[test]
fn largest_share_rises_as_tail_gets_heavier() {
    let shares: Vec<f64> = [3.0, 2.0, 1.5, 1.2].into_iter().map(mean_largest_share).collect();
    assert!(shares.windows(2).all(|w| w[1] > w[0]), "{shares:?}");
}

#[test]
fn grid_does_not_depend_on_thread_count() {
    let cfg = SynthConfig { days: 90, seed: 4, ..Default::default() };
    let run = daily_metrics::<f64>(&gen_history(&cfg).unwrap(), &MetricsConfig::default()).unwrap();
    let raw = gen_panel(&run.daily, &PanelPlan::catalogue(&["MKR", "ETH"]), 9).unwrap();
    let grid = |threads| {
        with_threads(Some(threads), || {
            let panel = AnalysisPanel::new(build_panel(&raw, VolMode::Simple).unwrap(), &run.daily);
            let tokens = ["MKR".to_string(), "ETH".to_string()];
            ols_grid_csv(&run_factor_matrix(&panel, &tokens, &govpulse_core::centrality::Measure::ALL, &GridOptions::default()))
        })
        .unwrap()
    };
    assert_eq!(grid(1), grid(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn same_seed_same_everything(seed in any::<u64>(), days in 5..60usize) {
        let cfg = SynthConfig { seed, days, ..Default::default() };
        let (a, b) = (gen_history(&cfg).unwrap(), gen_history(&cfg).unwrap());
        prop_assert_eq!(votes_csv(&a), votes_csv(&b));
        let run = daily_metrics::<f64>(&a, &MetricsConfig::default()).unwrap();
        prop_assert_eq!(metrics_csv(&run.daily), metrics_csv(&daily_metrics::<f64>(&b, &MetricsConfig::default()).unwrap().daily));
        let plan = PanelPlan::catalogue(&["MKR"]);
        prop_assert_eq!(gen_panel(&run.daily, &plan, seed).unwrap().to_csv(), gen_panel(&run.daily, &plan, seed).unwrap().to_csv());
    }
}
