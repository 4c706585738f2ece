use core::fmt;

use crate::rational::Q;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the scheme constructors and calculators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// `K_P > L`: outside the regime the scheme and bounds cover.
    Regime { perfect_users: u32, antennas: u32 },
    /// A parameter is outside its domain (non-positive count, `N < K`, `γ ∉ [0,1]`, ...).
    Domain(&'static str),
    /// The file length does not split evenly into subfiles.
    Split { file_bits: usize, parts: u64 },
    /// An operation that needs an integer point `Λγ` was handed a non-integer one.
    NonIntegerPoint { lambda: u32, gamma: Q },
    /// An operation that needs a non-integer `Λγ` was handed an integer one.
    IntegerPoint { t: u32 },
    /// Invalid demand vector.
    Demand(&'static str),
    /// A subfile needed for interference removal is not in the user's cache.
    MissingCache { user: u32, file: u32 },
    /// No `ℓ ∈ [s]` satisfies the minimality condition.
    NoFeasibleEll { s: u32 },
    /// Bound denominator is zero or negative for the chosen variant.
    DegenerateDenominator { ell: u32, n: u32 },
    /// Linear system is singular or rank deficient.
    Singular,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Regime { perfect_users, antennas } => write!(
                f,
                "regime violated: K_P = {perfect_users} exceeds L = {antennas}"
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Split { file_bits, parts } => write!(
                f,
                "file length {file_bits} bits is not divisible into {parts} subfiles"
            ),
            Error::NonIntegerPoint { lambda, gamma } => write!(
                f,
                "Λγ = {lambda}·{gamma} is not an integer; memory sharing required"
            ),
            Error::IntegerPoint { t } => {
                write!(f, "Λγ = {t} is an integer point; memory sharing not needed")
            }
            Error::Demand(msg) => write!(f, "invalid demand: {msg}"),
            Error::MissingCache { user, file } => write!(
                f,
                "user {user} lacks a cached subfile of file {file} needed for cancellation"
            ),
            Error::NoFeasibleEll { s } => write!(f, "no feasible ℓ in [1, {s}]"),
            Error::DegenerateDenominator { ell, n } => {
                write!(f, "non-positive bound denominator at ℓ = {ell}, N = {n}")
            }
            Error::Singular => f.write_str("singular or rank-deficient system"),
        }
    }
}

impl core::error::Error for Error {}
