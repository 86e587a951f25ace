use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded for {what}: requested {requested}, capacity {capacity}")]
    Capacity {
        what: &'static str,
        requested: usize,
        capacity: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("domain assumption violated: {0}")]
    DomainAssumption(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("factorization broke down at shift {shift} (pivot {pivot} at row {row})")]
    Breakdown { shift: f64, row: usize, pivot: f64 },

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("quadrature did not reach tolerance: {0}")]
    Tolerance(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failed at h = {h}: {source}")]
    AtStep {
        h: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Attach the semiclassical parameter of the failing sweep step.
    pub fn at_h(self, h: f64) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                h,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by the numerical solve rather than by the inputs.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Breakdown { .. } | Error::NotConverged(_) | Error::Tolerance(_) => true,
            Error::AtStep { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
