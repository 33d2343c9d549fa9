use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector handed to an operation has the wrong length.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A precondition on a scalar or shape argument is violated.
    InvalidArgument(String),
    /// `ΦΦᵀ = cI` does not hold to the required accuracy.
    NotTightFrame {
        relative_error: f64,
    },
    /// The blur operator cannot be diagonalized in the Fourier domain.
    MissingTransferFunction,
    /// A real-to-real frequency-domain filter produced a non-negligible
    /// imaginary part.
    ImaginaryResidue(f64),
    /// The scalar penalty prox root-finder could not bracket or converge.
    RootFinding {
        coordinate: usize,
        reason: &'static str,
    },
    InvalidPenalty(String),
    /// `σ·τ·ζ ≥ 1`; the suggested pair satisfies the bound.
    InvalidStepSizes {
        product: f64,
        suggested_sigma: f64,
        suggested_tau: f64,
    },
    /// A relaxation parameter outside `[θ_min, 2 − θ_min]`.
    InvalidRelaxation {
        iteration: usize,
        theta: f64,
    },
    /// No point with finite objective could be exhibited.
    Infeasible(String),
    /// NaN or infinity appeared in a solver iterate.
    NonFinite {
        iteration: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch in {context}: expected length {expected}, found {found}"
            ),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotTightFrame { relative_error } => write!(
                f,
                "dictionary is not a tight frame (relative error {relative_error:.3e})"
            ),
            Error::MissingTransferFunction => {
                f.write_str("blur operator has no stored transfer function")
            }
            Error::ImaginaryResidue(r) => {
                write!(
                    f,
                    "internal error: imaginary residue {r:.3e} in real filter"
                )
            }
            Error::RootFinding { coordinate, reason } => {
                write!(
                    f,
                    "penalty prox failed at coordinate {coordinate}: {reason}"
                )
            }
            Error::InvalidPenalty(msg) => write!(f, "inadmissible penalty: {msg}"),
            Error::InvalidStepSizes {
                product,
                suggested_sigma,
                suggested_tau,
            } => write!(
                f,
                "step sizes violate sigma*tau*zeta < 1 (got {product:.6}); \
                 try sigma = {suggested_sigma:.6}, tau = {suggested_tau:.6}"
            ),
            Error::InvalidRelaxation { iteration, theta } => write!(
                f,
                "relaxation parameter theta = {theta} at iteration {iteration} is outside ]0,2["
            ),
            Error::Infeasible(msg) => write!(f, "infeasible problem: {msg}"),
            Error::NonFinite { iteration } => {
                write!(f, "non-finite value in iterate at iteration {iteration}")
            }
        }
    }
}

impl core::error::Error for Error {}
