use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (last partial sum {partial})")]
    SeriesNonConvergence { terms: usize, partial: f64 },

    #[error(
        "quadrature did not reach tolerance after {subdivisions} subdivisions: \
         value {value}, estimated error {abs_error}"
    )]
    QuadratureNonConvergence {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    #[error("coupling gamma = {gamma} is not above the critical value {gamma_c}")]
    Subcritical { gamma: f64, gamma_c: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("grid does not cover the support: {0}")]
    GridCoverage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
