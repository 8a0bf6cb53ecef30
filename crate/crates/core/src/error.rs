use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The round would overrun the charger's deadline.
    #[error(
        "real-time constraint violated: {slots} slots x {slot_duration} > deadline {deadline}"
    )]
    Deadline {
        slots: usize,
        slot_duration: f64,
        deadline: f64,
    },

    /// Geometric precondition failure (charger coincides with a sensor or grid).
    #[error("degenerate geometry: {0}")]
    Geometry(String),

    /// Vector or matrix shapes do not agree.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// Argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The model assumptions behind an operation do not hold.
    #[error("model error: {0}")]
    Model(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}
