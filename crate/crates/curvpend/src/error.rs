use thiserror::Error;

/// Errors produced by model construction, integration, and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter failed validation at construction time.
    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// The requested operation is undefined on a flat (zero-curvature) surface.
    #[error("{op} requires nonzero curvature")]
    FlatCurvature { op: &'static str },

    /// A curvature-trig quotient was evaluated at a zero of its denominator.
    #[error("{func} is singular at argument {arg}")]
    TrigPole { func: &'static str, arg: f64 },

    /// An argument fell outside the mathematical domain of the operation.
    #[error("{what} out of domain: {value} is not in {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A quantity that must be finite evaluated to NaN or infinity.
    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    /// The integrator/system combination is not supported.
    #[error("{method} integration is not available for the {system} system")]
    UnsupportedPairing {
        method: &'static str,
        system: &'static str,
    },

    /// The adaptive controller drove the step size below the representable
    /// minimum without meeting the error tolerance.
    #[error("adaptive step underflow at t = {t} (dt = {dt:.3e})")]
    StepUnderflow { t: f64, dt: f64 },

    /// The generalized mass matrix recovered from the Lagrangian is too
    /// ill-conditioned to invert reliably.
    #[error("mass matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularMassMatrix { cond: f64 },

    /// The iterative eigensolver did not converge.
    #[error("eigensolver failed to converge on a {n}x{n} operator")]
    EigenFailure { n: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
