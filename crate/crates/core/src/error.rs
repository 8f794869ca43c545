use thiserror::Error;

/// Errors raised by the numeric, zero-finding and reporting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidPrecision(String),

    #[error("invalid interval: lower bound {a} exceeds upper bound {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("quadrature did not converge after {refinements} refinements (last difference {difference:e})")]
    NonConvergent { refinements: u32, difference: f64 },

    #[error("finite-difference step {step:e} is below the working-precision floor")]
    StepUnderflow { step: f64 },

    #[error("kernel argument {x} lies outside the planned domain [0, {x_max}]")]
    OutOfDomain { x: f64, x_max: f64 },

    #[error("aleph must be a finite real number, got {0}")]
    InvalidAleph(String),

    #[error("coefficient alpha_{{2*{gamma}}} is not positive beyond its error radius")]
    PositivityViolation { gamma: u32 },

    #[error(
        "series tail is not geometrically bounded (ratio {ratio:.3e} >= 1/2); enlarge gamma_max"
    )]
    TailNotBounded { ratio: f64 },

    #[error("coefficient table has {have} entries, need at least {need}")]
    InsufficientEntries { have: usize, need: usize },

    #[error("function value cannot be resolved above its error radius on [{lo}, {hi}]")]
    PrecisionExhausted { lo: f64, hi: f64 },

    #[error("no sign change across bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("Newton iteration left the bracket [{lo}, {hi}]")]
    NewtonDiverged { lo: f64, hi: f64 },

    #[error("contour passes within the error radius of a zero (min modulus {min_modulus:e}); retry with the box perturbed by {suggested_eps:e}")]
    ZeroOnContour {
        suggested_eps: f64,
        min_modulus: f64,
    },

    #[error("box subdivision exceeded depth {depth}")]
    SubdivisionLimit { depth: u32 },

    #[error("product needs {need} zeros, table holds {have}")]
    InsufficientZeros { have: usize, need: usize },

    #[error("zero table is empty")]
    EmptyTable,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerical machinery itself (as opposed to
    /// bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergent { .. }
                | Error::StepUnderflow { .. }
                | Error::PositivityViolation { .. }
                | Error::TailNotBounded { .. }
                | Error::PrecisionExhausted { .. }
                | Error::NoSignChange { .. }
                | Error::NewtonDiverged { .. }
                | Error::ZeroOnContour { .. }
                | Error::SubdivisionLimit { .. }
                | Error::InsufficientZeros { .. }
                | Error::InsufficientEntries { .. }
                | Error::EmptyTable
        )
    }
}
