use std::path::PathBuf;

use thiserror::Error;

use crate::ring::Domain;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a polynomial in the {expected:?} domain, found {found:?}")]
    Domain { expected: Domain, found: Domain },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parameter set mismatch: expected {expected}, found {found}")]
    ParamsMismatch { expected: String, found: String },

    #[error("value {value} out of range (must be < {modulus})")]
    Range { value: u64, modulus: u64 },

    #[error("capacity exceeded: pack already holds {len} of {capacity} payload slots")]
    Capacity { len: usize, capacity: usize },

    #[error("slot index {index} out of range for logical length {len}")]
    Index { index: usize, len: usize },

    #[error("no rotation key for step {0}")]
    MissingKey(i64),

    #[error("noise budget {budget:.1} bits is below the {floor:.1}-bit floor; refresh required")]
    RefreshRequired { budget: f64, floor: f64 },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated input: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("unknown table `{0}`")]
    UnknownTable(String),

    #[error("unknown group {group} in table `{table}`")]
    UnknownGroup { table: String, group: u64 },

    #[error("{0} already exists")]
    AlreadyExists(PathBuf),

    #[error("ingest error at row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    #[error("engine diverged from the plaintext oracle: {0}")]
    Divergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}
