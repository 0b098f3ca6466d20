use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {subdivisions} subdivisions")]
    NonConvergent {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand tail does not decay; integral on the unbounded domain diverges")]
    TailDivergent,

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("no sign change on bracket [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },

    #[error("step size underflow at r = {r:e}")]
    StepFailure { r: f64 },

    #[error("maximum step count {0} exceeded")]
    MaxSteps(usize),

    #[error("profile has zero norm")]
    ZeroProfile,

    #[error("profile is not strictly decreasing near r = {r}")]
    NotMonotone { r: f64 },

    #[error("profile support [0, {support}] not covered by the table range [{lo}, {hi}]")]
    RangeError { support: f64, lo: f64, hi: f64 },

    #[error("volume {v} outside the tabulated range (max {max})")]
    InversionFailure { v: f64, max: f64 },

    #[error("curvature hypothesis -psi''/psi <= -{k} fails at r = {r} (got {actual})")]
    CurvatureHypothesisFailed { k: f64, r: f64, actual: f64 },

    #[error("{0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// bad inputs or spec parse problems.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergent { .. }
                | Error::TailDivergent
                | Error::Divergent(_)
                | Error::NoSignChange { .. }
                | Error::StepFailure { .. }
                | Error::MaxSteps(_)
                | Error::ZeroProfile
                | Error::NotMonotone { .. }
                | Error::RangeError { .. }
                | Error::InversionFailure { .. }
                | Error::CurvatureHypothesisFailed { .. }
        )
    }
}
