use std::fmt;

/// Errors surfaced by the library. Every variant corresponds to a violated
/// precondition or an exhausted resource budget; none is recoverable by
/// retrying with the same inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A median was requested of an empty value distribution.
    EmptyDistribution,
    /// The query cube does not overlap the function's root cube.
    EmptyOverlap,
    /// A family operation was invoked on an empty cube family.
    EmptyFamily,
    /// A partition or scan would enumerate more cells than the configured budget.
    CellBudget { required: u128, budget: u64 },
    /// The cube is not a member of the dyadic lattice of the reference cube.
    LatticeMembership(String),
    /// Chain construction requires the first cube to sit inside the second.
    Containment(String),
    /// Gap machinery could not cover the requested fraction of the interval.
    InsufficientCoverage,
    /// Not enough generator points below the truncation bound.
    InsufficientPoints { needed: usize, available: usize },
    /// An integral of a distance power diverges on the given cube.
    Divergence { cube: String, exponent: String },
    /// A parameter fell outside its admissible range.
    InvalidParams(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyDistribution => write!(f, "empty value distribution"),
            Error::EmptyOverlap => write!(f, "cube does not overlap the function domain"),
            Error::EmptyFamily => write!(f, "empty cube family"),
            Error::CellBudget { required, budget } => {
                write!(f, "cell budget exceeded: need {required} cells, budget {budget}")
            }
            Error::LatticeMembership(msg) => write!(f, "not a dyadic lattice member: {msg}"),
            Error::Containment(msg) => write!(f, "containment violated: {msg}"),
            Error::InsufficientCoverage => {
                write!(f, "free gaps cover less than the requested fraction")
            }
            Error::InsufficientPoints { needed, available } => {
                write!(f, "need {needed} generator points, only {available} available")
            }
            Error::Divergence { cube, exponent } => {
                write!(f, "divergent integral of distance^{exponent} on {cube}")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
