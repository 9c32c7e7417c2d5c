use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("relaxation did not converge after {flips} flips")]
    NonConvergence { flips: u64 },

    #[error("{branch} branch never crosses M = 0")]
    NoCrossing { branch: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
