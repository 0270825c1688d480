use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),

    /// A resonance denominator vanished to within the singular-point tolerance.
    #[error("singular point: |{what}| = {modulus:e} below tolerance")]
    Singular { what: &'static str, modulus: f64 },

    #[error("cavity intensity {0:e} too small for correlation functions")]
    ZeroIntensity(f64),

    #[error("Fano parameter undefined: kappa0 * gamma0 = 0")]
    UndefinedFanoParameter,

    #[error("superoperator dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    /// The trace-constrained Liouvillian could not be inverted; usually a
    /// decoherence-free subspace makes the steady state non-unique.
    #[error("steady-state system is rank deficient (residual {residual:e})")]
    RankDeficient { residual: f64 },

    #[error("Fock cutoff did not converge up to n_max = {n_max} (last relative change {last_change:e})")]
    NotConverged { n_max: usize, last_change: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from the physics (divergent or degenerate
    /// points) rather than from bad input.
    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::ZeroIntensity(_) | Error::RankDeficient { .. }
        )
    }
}
