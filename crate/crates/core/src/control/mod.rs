//! Control paths: the unit of both human and algorithmic solutions.

mod edit;
mod path;
mod record;

pub use edit::{move_point, resample, smooth, stretch_time, LockMask};
pub use path::{ControlPath, PathOrigin};
pub use record::{
    decode_batch, decode_play, encode_batch, encode_play, PlayRecord, RECORD_VERSION,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("control path needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("first sample must be at t = 0, got {0}")]
    NonZeroStart(f64),
    #[error("sample times must strictly increase (index {index}: {prev} -> {next})")]
    Unordered { index: usize, prev: f64, next: f64 },
    #[error("sample {index} has non-finite or negative values")]
    InvalidSample { index: usize },
    #[error("sample {index} out of bounds: {field} = {value} not in [{min}, {max}]")]
    OutOfBounds {
        index: usize,
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("unsupported play record version {0}")]
    UnsupportedVersion(u8),
    #[error("malformed play record: {0}")]
    Malformed(String),
    #[error("invalid path in play record: {0}")]
    Path(#[from] PathError),
}
