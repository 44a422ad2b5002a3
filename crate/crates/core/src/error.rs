use thiserror::Error;

/// Errors raised by the prediction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{function}: pole at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("degenerate covariance: eigenvalues span [{min_eig:e}, {max_eig:e}]")]
    DegenerateCovariance { min_eig: f64, max_eig: f64 },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("series did not converge after {terms} terms (last increment {last_increment:e})")]
    SeriesDivergence { terms: usize, last_increment: f64 },

    #[error("unsupported dimension d = {0}")]
    UnsupportedDimension(usize),

    #[error("no closed form for this branch: {0}")]
    UnsupportedBranch(String),

    #[error("parameter degeneracy: {0}")]
    ParameterDegeneracy(String),

    #[error("closed form unavailable, numeric fallback needed: {0}")]
    FallbackNeeded(String),

    #[error("MGF does not exist at beta = {beta} (requires beta < {bound})")]
    MgfDomain { beta: f64, bound: f64 },

    #[error("interferer mobilities are not homogeneous: {0}")]
    HomogeneityViolation(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("I/O: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the numerics (divergent integrals, poles,
    /// non-convergent series) rather than malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. }
                | Error::Domain { .. }
                | Error::DegenerateCovariance { .. }
                | Error::Divergence(_)
                | Error::SeriesDivergence { .. }
                | Error::UnsupportedBranch(_)
                | Error::ParameterDegeneracy(_)
                | Error::FallbackNeeded(_)
                | Error::MgfDomain { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
