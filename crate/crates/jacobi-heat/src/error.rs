use thiserror::Error;

/// Errors raised by the kernel library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// Type parameters are invalid or outside the range required by the operation.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The result does not fit in an f64.
    #[error("overflow in {func} at argument {arg}")]
    Overflow { func: &'static str, arg: f64 },

    /// The requested evaluation is below the series cost/precision floor.
    #[error("series cost/precision floor: t = {t} is below the floor {floor}")]
    PrecisionFloor { t: f64, floor: f64 },

    /// The series did not reach the requested tail tolerance within `max_terms`.
    #[error("series truncation exhausted {max_terms} terms with tail bound {tail_bound:e}")]
    TruncationExhausted { max_terms: usize, tail_bound: f64 },

    /// Newton iteration for quadrature nodes failed.
    #[error("root finding failed for degree {degree} rule (a = {a}, b = {b}): {msg}")]
    RootFinding {
        degree: usize,
        a: f64,
        b: f64,
        msg: String,
    },

    /// Adaptive quadrature hit its degree cap.
    #[error("quadrature did not converge by degree {degree}: best estimate {estimate:e}, last relative change {achieved:e}")]
    Quadrature {
        degree: usize,
        estimate: f64,
        achieved: f64,
    },

    /// An integrand produced a non-finite value.
    #[error("non-finite integrand value {value} at node {node}")]
    NonFinite { node: f64, value: f64 },

    /// Constant fitting found no admissible constants.
    #[error("envelope fit infeasible: {0}")]
    Infeasible(String),

    /// Grid and density shapes do not match.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        func,
        msg: msg.into(),
    }
}
