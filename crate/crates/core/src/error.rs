use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("unexpected end of file")]
    UnexpectedEof,

    #[error("unsupported bit depth (maxval {0})")]
    UnsupportedBitDepth(u32),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed header: {0}")]
    MalformedHeader(&'static str),

    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("loss rate {0} outside [0, 1]")]
    InvalidRate(f64),

    #[error("block ({row}, {col}) outside the block grid")]
    BlockOutOfRange { row: usize, col: usize },

    #[error("empty context")]
    EmptyContext,

    #[error("no candidates")]
    NoCandidates,

    #[error("insufficient candidates: {0}")]
    InsufficientCandidates(usize),

    #[error("kernel weights vanished")]
    WeightsVanished,

    #[error("covariance matrix is not positive definite")]
    SingularCovariance,

    #[error("support area exhausted")]
    SupportExhausted,

    #[error("invalid profile thresholds (t_phi = {t_phi}, t_nu = {t_nu})")]
    InvalidProfile { t_phi: f64, t_nu: f64 },

    #[error("image too small for SSIM ({width}x{height})")]
    ImageTooSmall { width: usize, height: usize },

    #[error("empty report")]
    EmptyReport,
}
