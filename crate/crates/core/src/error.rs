use thiserror::Error;

/// Every failure the numerical core can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func} did not converge after {terms} terms")]
    Convergence { func: &'static str, terms: usize },

    #[error("series in {func} lost significance: {detail}")]
    SeriesDivergence { func: &'static str, detail: String },

    #[error("quadrature failed: estimated error {achieved:.3e} above tolerance {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { func, detail: detail.into() }
    }

    /// True for failures caused by a numerical method rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::SeriesDivergence { .. } | Error::Quadrature { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
