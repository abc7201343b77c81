use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ProfileInvalid: {0}")]
    ProfileInvalid(String),

    /// The shooting solution lost positivity; the warp or the tolerances are bad.
    #[error("SingularityTooStrong: psi not positive at r = {r} (mode m = {m})")]
    SingularityTooStrong { r: f64, m: u32 },

    #[error("IntegratorFailure: {0}")]
    IntegratorFailure(String),

    #[error("NonUniqueSolution: boundary system is singular (lambda = {lambda})")]
    NonUniqueSolution { lambda: f64 },

    #[error("AsymmetryError: weighted DtN block asymmetric, relative deviation {deviation:.3e}")]
    AsymmetryError { deviation: f64 },

    #[error("QuadratureBlowup: {0}")]
    QuadratureBlowup(String),

    #[error("CBoundViolated: max h = {max_h} exceeds C = {c}")]
    CBoundViolated { max_h: f64, c: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a failed solve.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::ProfileInvalid(_) | Error::Parse(_) | Error::CBoundViolated { .. }
        )
    }
}
