use thiserror::Error;

use crate::access_tree::AttributeId;

/// Failure classes surfaced by the library and mapped onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("malformed access tree: {0}")]
    Structure(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("attribute {attribute} is not managed by authority {authority}")]
    Jurisdiction {
        attribute: AttributeId,
        authority: u32,
    },

    #[error("access policy is not satisfied by the ciphertext attributes")]
    PolicyNotSatisfied,

    #[error("proof of knowledge rejected")]
    ProofRejected,

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("key does not trace to any registered identity")]
    UntraceableKey,

    #[error("trace table integrity violated: {0}")]
    TableIntegrity(String),

    #[error("decryption key is not well-formed")]
    InvalidKey,

    #[error("finalized key fails verification against the public parameters")]
    IssuanceInconsistency,

    #[error("sealed payload failed authentication")]
    Tampering,

    #[error("game aborted: {0}")]
    GameAbort(String),

    #[error("checksum mismatch")]
    Corruption,

    #[error("unsupported format version {0}")]
    Version(u8),

    #[error("backend mismatch: expected {expected:#04x}, found {found:#04x}")]
    BackendMismatch { expected: u8, found: u8 },

    #[error("invalid encoding: {0}")]
    Validation(String),

    #[error("storage error: {0}")]
    Storage(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
