//! Seeded synthetic voting histories and factor panels with planted effects,
//! plus reference formulas for cross-checking.

mod config;
mod history;
mod oracle;
mod panel;

pub use config::{DelaySpec, HoldingsModel, HoldingsSampling, PollsPerDay, SynthConfig};
pub use history::{gen_history, gen_history_detailed, SynthHistory, ABSTAIN};
pub use oracle::{gini_oracle, ols_oracle};
pub use panel::{gen_iv_sample, gen_panel, EndogenousBlock, FactorPlan, PanelPlan};
