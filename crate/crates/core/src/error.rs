use thiserror::Error;

/// Errors raised by the computation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} lies outside [{t_a}, {t_b}]")]
    Domain { t: f64, t_a: f64, t_b: f64 },

    #[error("invalid frequency profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failed: non-finite Ω² = {value} at t = {t}")]
    Integration { t: f64, value: f64 },

    #[error("caustic: |{quantity}| = {value:e} does not exceed tolerance {tol:e}")]
    Caustic {
        quantity: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("singular lattice operator: pivot {pivot:e} at row {row}")]
    SingularLattice { row: usize, pivot: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("F derivative of order {0} missing from the table")]
    MissingDerivative(usize),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),
}

impl Error {
    /// Short machine-readable category, used on the CLI diagnostic stream.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidProfile(_) => "invalid-profile",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Integration { .. } => "integration",
            Error::Caustic { .. } => "caustic",
            Error::SingularLattice { .. } => "singular-lattice",
            Error::NotPositiveDefinite(_) => "not-positive-definite",
            Error::Parity(_) => "parity",
            Error::MissingDerivative(_) => "missing-derivative",
            Error::Mode(_) => "mode",
            Error::Size(_) => "size",
            Error::NotImplemented(_) => "not-implemented",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
