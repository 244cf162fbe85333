//! Crate-wide error type.

use std::fmt;
use std::io;

/// Errors raised by the moment, image and classification pipelines.
#[derive(Debug)]
pub enum Error {
    /// Requested polynomial degree exceeds what the discrete node set supports
    /// (at most `node_count` linearly independent polynomials exist on
    /// `node_count` nodes).
    DegreeTooHigh { degree: usize, node_count: usize },
    /// A discrete-Chebyshev family needs at least two nodes.
    TooFewNodes { node_count: usize },
    /// Basis evaluation was asked for an empty point set.
    EmptyPoints,
    /// Simpson's composite rule needs an odd point count of at least 3.
    BadQuadratureSize { points: usize },
    /// Moment computation needs an image of at least 3x3 pixels.
    ImageTooSmall { rows: usize, cols: usize },
    /// Intensities outside [0, 1] (or non-finite) where the contract
    /// requires normalized data.
    IntensityOutOfRange { row: usize, col: usize, value: f64 },
    /// Reconstruction target dimensions do not match the basis family
    /// carried by the moment matrix.
    GridMismatch { expected: (usize, usize), got: (usize, usize) },
    /// Relative reconstruction error is undefined for an all-zero image.
    ZeroImage,
    /// GLCM extraction needs a quantized (level) image.
    MissingLevels,
    /// An angle outside {0, 45, 90, 135} was requested.
    BadAngle { degrees: u32 },
    /// Feature vectors of inconsistent length.
    FeatureLengthMismatch { expected: usize, got: usize },
    /// Classification needs a nonempty training set.
    EmptyTrainingSet,
    /// Stratified splitting needs at least two samples per class.
    ClassTooSmall { class: usize, count: usize },
    /// The rotation protocol needs samples at orientation 0.
    MissingZeroOrientation,
    /// Split fraction must lie strictly between 0 and 1.
    BadFraction { fraction: f64 },
    /// Parallel arrays (features / labels / orientations) differ in length.
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    /// Generic precondition failure on an argument.
    InvalidArgument(String),
    /// PGM header does not start with a supported magic number.
    PgmBadMagic(String),
    /// PGM header is structurally broken (missing or non-numeric fields,
    /// maxval out of range, bad sample values).
    PgmMalformedHeader(String),
    /// PGM payload has the wrong size for the declared dimensions.
    PgmPayloadSize { expected: usize, actual: usize },
    /// Malformed CSV produced or consumed by the serialization interfaces.
    MalformedCsv(String),
    Io(io::Error),
    Json(serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegreeTooHigh { degree, node_count } => write!(
                f,
                "degree {degree} is not reachable on {node_count} discrete nodes (need degree < node count)"
            ),
            Error::TooFewNodes { node_count } => {
                write!(f, "discrete Chebyshev family needs node_count >= 2, got {node_count}")
            }
            Error::EmptyPoints => write!(f, "basis evaluation needs a nonempty point set"),
            Error::BadQuadratureSize { points } => {
                write!(f, "Simpson's rule needs an odd point count >= 3, got {points}")
            }
            Error::ImageTooSmall { rows, cols } => {
                write!(f, "image of {rows}x{cols} is below the 3x3 minimum")
            }
            Error::IntensityOutOfRange { row, col, value } => {
                write!(f, "intensity {value} at ({row}, {col}) is outside [0, 1]")
            }
            Error::GridMismatch { expected, got } => write!(
                f,
                "reconstruction grid {}x{} does not match the moment source {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            Error::ZeroImage => write!(f, "relative error is undefined for an all-zero image"),
            Error::MissingLevels => write!(f, "co-occurrence extraction needs a quantized image"),
            Error::BadAngle { degrees } => {
                write!(f, "angle {degrees} not in {{0, 45, 90, 135}}")
            }
            Error::FeatureLengthMismatch { expected, got } => {
                write!(f, "feature length {got} does not match {expected}")
            }
            Error::EmptyTrainingSet => write!(f, "training set is empty"),
            Error::ClassTooSmall { class, count } => {
                write!(f, "class {class} has {count} samples, need at least 2")
            }
            Error::MissingZeroOrientation => {
                write!(f, "rotation protocol needs samples at orientation 0")
            }
            Error::BadFraction { fraction } => {
                write!(f, "split fraction must be in (0, 1), got {fraction}")
            }
            Error::LengthMismatch { what, expected, got } => {
                write!(f, "{what}: expected length {expected}, got {got}")
            }
            Error::InvalidArgument(msg) => write!(f, "{msg}"),
            Error::PgmBadMagic(magic) => {
                write!(f, "unsupported PGM magic number {magic:?} (expected P2 or P5)")
            }
            Error::PgmMalformedHeader(msg) => write!(f, "malformed PGM header: {msg}"),
            Error::PgmPayloadSize { expected, actual } => write!(
                f,
                "PGM payload must be exactly {expected} bytes, found {actual}"
            ),
            Error::MalformedCsv(msg) => write!(f, "malformed CSV: {msg}"),
            Error::Io(e) => write!(f, "I/O error: {e}"),
            Error::Json(e) => write!(f, "JSON error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

impl Error {
    /// True for errors that signal a numeric-domain violation (as opposed to
    /// I/O or format problems); used by the CLI to pick exit codes.
    pub fn is_domain(&self) -> bool {
        !matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::PgmBadMagic(_)
                | Error::PgmMalformedHeader(_)
                | Error::PgmPayloadSize { .. }
                | Error::MalformedCsv(_)
        )
    }
}
