//! Participation, voting-power concentration and efficiency measurements,
//! per poll and aggregated per day.

mod daily;
mod gini;
mod poll;

pub use daily::{daily_metrics, metrics_csv, poll_metrics_csv, utc_date, CalendarMode, DailyMetrics, Measure, MetricsRun, METRICS_HEADER};
pub use gini::{
    daily_gini, gini_pairwise, lorenz_from_amounts, lorenz_points, mle_gini, pareto_tail_index, poll_gini,
    voter_day_totals, DailyGiniMode, LorenzCurve, GINI_CEILING_EPS,
};
pub use poll::{
    largest_ballot, largest_voter_stats, metrics_from_ballots, poll_metrics, poll_participation, poll_speed,
    LargestVoter, MetricsConfig, OrderRule, PollMetrics, PollSpeed,
};
