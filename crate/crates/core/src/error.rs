use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Argument outside the domain on which a quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two phase-space points built on different momentum grids.
    #[error("phase points live on different momentum grids")]
    GridMismatch,
    /// A numerical routine failed or an invariant was violated.
    #[error("numeric failure in {module}: {message}")]
    Numeric { module: &'static str, message: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Numeric {
            module,
            message: msg.into(),
        }
    }
}
