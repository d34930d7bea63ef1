use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Validation failures raised by the clustering routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input that must hold at least one element was empty.
    Empty(&'static str),
    /// A value at the given position was NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// Two inputs disagree on size.
    DimensionMismatch { expected: usize, found: usize },
    /// A configuration parameter is outside its valid range.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// A label vector is not a valid configuration: `point` is assigned to
    /// `exemplar`, which is not assigned to itself.
    InvalidConfiguration { point: usize, exemplar: usize },
    /// Exhaustive search was requested on an input that is too large.
    TooLarge { n: usize, max: usize },
    /// An unrecognised name was given for an enumerated option.
    UnknownKind,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "{what} must not be empty"),
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::InvalidConfiguration { point, exemplar } => write!(
                f,
                "invalid configuration: point {point} is assigned to {exemplar}, which is not its own exemplar"
            ),
            Error::TooLarge { n, max } => {
                write!(f, "input of size {n} exceeds the exhaustive-search limit of {max}")
            }
            Error::UnknownKind => f.write_str("unknown kind"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
