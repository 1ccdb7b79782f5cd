//! Crate-wide error type.

use std::fmt;

/// Errors surfaced by instance construction, the environment, the policy
/// layer and the theory computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument was NaN or infinite where a finite value is required.
    NonFinite(&'static str),
    /// `logit(p)` was called with `p` outside the open interval (0, 1).
    LogitDomain(f64),
    /// The arm matrix does not have full row rank.
    RankDeficient,
    /// Instance shape violation (m < n, empty matrix, dimension mismatch...).
    BadShape(String),
    /// A weight was zero, negative or non-finite.
    BadWeight(f64),
    /// Arm index out of range.
    ArmIndex(usize),
    /// A sphere arm must be a unit vector (‖arm‖ = 1 within 1e-9).
    NotUnit(f64),
    /// Timestep appended out of order to a trace.
    OutOfOrder { expected: u64, got: u64 },
    /// The best arm is tied with a non-best arm: the certified region around
    /// the preference vector has zero width (δ = 0), so γ is undefined.
    DegenerateDelta,
    /// The L′ scan hit its epoch cap while the defining term was still above
    /// one half: the schedule grows too fast for this instance's constants.
    ScheduleNotAdmissible { scanned: u64 },
    /// Exact enumeration would exceed its outcome budget.
    EnumerationBudget { states: u128, budget: u128 },
    /// Invalid schedule parameterisation.
    BadSchedule(String),
    /// The sphere analysis requires dimension ≥ 2.
    SphereDimension(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite(what) => write!(f, "{what} must be finite"),
            Error::LogitDomain(p) => write!(f, "logit domain error: p = {p} is not in (0, 1)"),
            Error::RankDeficient => write!(f, "arm matrix does not have full row rank"),
            Error::BadShape(msg) => write!(f, "bad instance shape: {msg}"),
            Error::BadWeight(w) => write!(f, "weights must be strictly positive, got {w}"),
            Error::ArmIndex(i) => write!(f, "arm index {i} out of range"),
            Error::NotUnit(norm) => write!(f, "sphere arm must be a unit vector, got norm {norm}"),
            Error::OutOfOrder { expected, got } => {
                write!(f, "trace timestep out of order: expected {expected}, got {got}")
            }
            Error::DegenerateDelta => {
                write!(f, "δ = 0: a non-best arm ties the best arm, γ is undefined")
            }
            Error::ScheduleNotAdmissible { scanned } => write!(
                f,
                "schedule term (e^(-γl)+e^(-k1 l))·g(l) did not settle below 1/2 within {scanned} epochs"
            ),
            Error::EnumerationBudget { states, budget } => {
                write!(f, "enumeration needs {states} states, budget is {budget}")
            }
            Error::BadSchedule(msg) => write!(f, "bad schedule: {msg}"),
            Error::SphereDimension(n) => {
                write!(f, "sphere instances require dimension >= 2, got {n}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
