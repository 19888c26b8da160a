use alloc::string::String;

/// Errors produced by the simulator and the controllers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An iterative solve hit its iteration cap.
    #[error("{what} did not converge after {iterations} iterations (last iterate {last})")]
    Divergence { what: &'static str, iterations: usize, last: f64 },
    /// A state or parameter became NaN or infinite.
    #[error("non-finite value in {field}")]
    NumericalBlowup { field: &'static str },
    /// A caller broke a documented precondition.
    #[error("contract violated: {0}")]
    Contract(&'static str),
    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
    #[error("rule base is empty")]
    EmptyRuleBase,
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A controller failed during a closed-loop run.
    #[error("tick {tick}: {source}")]
    Tick {
        tick: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for configuration problems, false for numerical ones.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Tick { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, field: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericalBlowup { field })
    }
}
