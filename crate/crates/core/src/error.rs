use alloc::string::String;
use core::fmt;

/// Parameter and construction errors raised by the core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A frame or mask was built from a buffer of the wrong length.
    BufferSize { expected: usize, actual: usize },
    /// Width or height of zero.
    EmptyDimensions,
    /// Blur radius above `min(width, height) / 2`.
    BlurRadius { radius: usize, limit: usize },
    /// A value outside its documented domain.
    OutOfRange { field: &'static str, detail: String },
    /// A synthetic script or menu layout breaks one of its invariants.
    Invalid { what: &'static str, detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BufferSize { expected, actual } => {
                write!(f, "pixel buffer has {actual} bytes, expected {expected}")
            }
            Error::EmptyDimensions => f.write_str("width and height must be at least 1"),
            Error::BlurRadius { radius, limit } => write!(
                f,
                "blur radius {radius} exceeds the limit {limit} (min(width, height) / 2)"
            ),
            Error::OutOfRange { field, detail } => write!(f, "{field} out of range: {detail}"),
            Error::Invalid { what, detail } => write!(f, "invalid {what}: {detail}"),
        }
    }
}

impl core::error::Error for Error {}
