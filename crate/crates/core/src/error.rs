//! Error type shared by every module of the crate.

use crate::group::GroupElement;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
///
/// Arithmetic is exact and checked: any value leaving the signed 64-bit
/// range is reported as [`Error::ArithmeticOverflow`], never wrapped.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("arithmetic overflow in exact integer computation")]
    ArithmeticOverflow,

    #[error("matrix determinant must be +1 or -1, got {0}")]
    BadMatrix(i64),

    #[error("letter '{0}' is not admissible in this group")]
    IllegalLetter(char),

    #[error("generator word evaluates to the identity")]
    IdentityGenerator,

    #[error("no default generating set for this matrix; supply explicit generator words")]
    UnsupportedGroup,

    #[error("ball enumeration exceeded the element cap of {cap}")]
    ResourceLimit { cap: u64 },

    #[error("requested radius {requested} exceeds the enumerated radius {available}")]
    RadiusExceeded { requested: u32, available: u32 },

    #[error("empty box: lower corner must be <= upper corner componentwise")]
    EmptyBox,

    #[error("empty domain: total mass must be at least 1")]
    EmptyDomain,

    #[error("duplicate support vertex {0} in domain construction")]
    DuplicateVertex(GroupElement),

    #[error("domain is not characteristic: multiplicity {mult} at {at}")]
    NotCharacteristic { at: GroupElement, mult: u32 },

    #[error(
        "no transport witness in the ball of radius {radius}; radius is below the selection rule"
    )]
    WitnessNotFound { radius: u32 },

    #[error("least-squares fit needs at least 3 points with distinct abscissae")]
    DegenerateFit,

    #[error("n ln n ratios need every gradient >= 2")]
    DegenerateInput,

    #[error("corrupt cache file: {0}")]
    CorruptCache(String),

    #[error("cache header does not match the requesting configuration: {0}")]
    ConfigMismatch(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
