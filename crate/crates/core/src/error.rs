use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its contract. `key` names the offending
    /// setting in dotted form, e.g. `grid.epsilon`.
    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("CFL violation: dt = {dt:e} exceeds the admissible step {admissible:e}")]
    CflViolation { dt: f64, admissible: f64 },

    #[error("invalid initial data: {0}")]
    InvalidData(String),

    #[error("derivative heat kernel is singular at t = {t}")]
    SingularKernel { t: f64 },

    #[error("Picard iteration is not contracting (ratios {ratios:?}); retry with a smaller t_end")]
    NoContraction { ratios: Vec<f64> },

    #[error("run aborted at step {step} (t = {time}): {reason}")]
    Aborted {
        step: usize,
        time: f64,
        reason: String,
    },

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sweep member epsilon = {epsilon} failed: {source}")]
    Sweep {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
