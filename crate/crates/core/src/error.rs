use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("{what} did not converge (best residual {residual:.3e})")]
    Convergence { what: String, residual: f64 },
    #[error("integrability error: {0}")]
    Integrability(String),
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("profile kind mismatch: {0}")]
    KindMismatch(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("extrapolation error: {0}")]
    Extrapolation(String),
    #[error("flux error: {0}")]
    Flux(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("regularity error: {0}")]
    Regularity(String),
    #[error("range error: {msg} (value {value:.6e})")]
    Range { msg: String, value: f64 },
    #[error("certificate failure: reached {reached} of {required} negative directions")]
    Certificate { reached: usize, required: usize, diagnostics: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
