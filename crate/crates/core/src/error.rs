use thiserror::Error;

/// Errors produced by the sampling engine.
#[derive(Error, Debug)]
pub enum PssimError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("operation not supported for this model: {0}")]
    Unsupported(String),

    #[error("value {value} is outside the model state space")]
    OutsideStateSpace { value: f64 },

    #[error("configuration insufficiently specified at site {0}")]
    Unspecified(String),

    #[error("decomposition is supercritical (gamma = {gamma}); supply a step cap to override")]
    Supercritical { gamma: f64 },

    #[error("range ladder extension exceeded the hard cap {cap}")]
    RangeCapExceeded { cap: i64 },

    #[error("rejection sampler exceeded {attempts} attempts")]
    RejectionCapExceeded { attempts: u64 },

    #[error("enumeration budget exceeded: {states} local states requested, budget {budget}")]
    EnumerationBudget { states: f64, budget: f64 },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("sketch record is truncated; forward assignment requires an extinct ancestor set")]
    TruncatedRecord,

    #[error("initial configuration missing a value at residual site {0}")]
    MissingInitial(String),

    #[error("stochastic domination violated at site {site}: coupled mass {mass}")]
    DominationViolated { site: String, mass: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PssimError>;
