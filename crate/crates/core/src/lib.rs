//! Persistence analysis for delayed mass-action reaction networks.
//!
//! The pipeline runs from a parsed [`network::ReactionNetwork`] through
//! stoichiometry ([`stoich`]), semilocking sets ([`siphon`]), complex
//! balance ([`balance`]) and the block-wise rule engine ([`compose`]) to a
//! [`compose::PersistenceCertificate`]. [`sim`] integrates the delayed
//! dynamics for numerical evidence and [`reduce`] builds reduced systems.

pub mod balance;
pub mod compose;
pub mod fixtures;
pub mod linalg;
pub mod network;
pub mod reduce;
pub mod report;
pub mod siphon;
pub mod sim;
pub mod stoich;

pub use compose::{certify_persistence, PersistenceCertificate, Rule, Verdict};
pub use network::{parse_network, ReactionNetwork, SpeciesSet};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Network(#[from] network::NetError),
    #[error(transparent)]
    Stoich(#[from] stoich::StoichError),
    #[error(transparent)]
    Siphon(#[from] siphon::SiphonError),
    #[error(transparent)]
    Balance(#[from] balance::BalanceError),
    #[error(transparent)]
    Compose(#[from] compose::ComposeError),
    #[error(transparent)]
    Reduce(#[from] reduce::ReduceError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error("invalid network: {0}")]
    Invalid(String),
}

/// Parses and validates a network in one step.
pub fn load_network(text: &str) -> Result<ReactionNetwork, Error> {
    let net = parse_network(text)?;
    let diags = network::validate_network(&net);
    if diags.is_empty() {
        Ok(net)
    } else {
        let msgs: Vec<String> = diags.iter().map(|d| d.message.clone()).collect();
        Err(Error::Invalid(msgs.join("; ")))
    }
}

/// Enumeration cap from `CRNP_MAX_N`, falling back to the default.
pub fn max_n_from_env() -> usize {
    std::env::var("CRNP_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(siphon::DEFAULT_MAX_N)
}
