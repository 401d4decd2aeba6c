//! Governance centralization analytics for token-voted DAOs: voting-history
//! ingestion, participation and concentration measurements, factor panels,
//! OLS and 2SLS regression grids, and a seeded synthetic test bed.
//!
//! Statistics are generic over [`Real`]; the aliases below fix them to `f64`.

pub mod centrality;
pub mod econ;
pub mod error;
pub mod factorlab;
pub mod govdata;
pub mod io;
pub mod pipeline;
pub mod profiles;
pub mod scalar;
pub mod stats;
pub mod synthgov;

pub use error::{GovError, Result};
pub use scalar::Real;

pub type DailyMetrics = centrality::DailyMetrics<f64>;
pub type PollMetrics = centrality::PollMetrics<f64>;
pub type LorenzCurve = centrality::LorenzCurve<f64>;
pub type FactorPanel = govdata::FactorPanel<f64>;
pub type AlignedSample = factorlab::AlignedSample<f64>;
pub type OlsFit = econ::OlsFit<f64>;
pub type IvFit = econ::IvFit<f64>;
pub type SummaryStats = stats::SummaryStats<f64>;
