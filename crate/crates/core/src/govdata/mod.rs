//! Voting histories, poll registries, identities and factor series: the data
//! model plus CSV ingestion and validation.

mod amount;
mod ballots;
mod factors;
mod ingest;
mod model;
mod report;
mod validate;

pub use amount::{Amount, AmountError, DECIMALS};
pub use ballots::{final_ballots, winning_option, winning_option_excluding, BallotRule, Winner};
pub use factors::{
    load_factors, Category, Derivation, FactorCatalogue, FactorPanel, FactorSpec, SeriesKey, FACTORS_HEADER,
    INSTRUMENT_FACTOR, VOL_WINDOWS,
};
pub use ingest::{
    identities_csv, load_identities, load_polls, load_vote_log, parse_timestamp, polls_csv, votes_csv,
    IDENTITIES_HEADER, POLLS_HEADER, VOTES_HEADER,
};
pub use model::{Address, FinalBallot, OptionId, PollId, PollOption, PollRecord, VoteEvent, VoteLog};
pub use report::{Anomaly, AnomalyKind, Severity, Source, ValidationReport};
pub use validate::validate_dataset;
