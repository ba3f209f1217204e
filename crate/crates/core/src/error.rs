use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Scenario document failed to parse or validate; `path` names the offending field.
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },

    #[error("scenario infeasible: {0}")]
    InfeasibleScenario(String),

    /// IC mode cannot meet the GU requirement even at full GU power.
    #[error("site {site}: GU needs {required:.6e} W under IC but max is {max:.6e} W")]
    InfeasibleSite { site: usize, required: f64, max: f64 },

    #[error("slot {slot}: no decoding mode admits a feasible allocation")]
    InfeasibleSlot { slot: usize },

    #[error("mission duration {available:.3} s is shorter than the required {required:.3} s")]
    InsufficientDuration { required: f64, available: f64 },

    #[error("{count} sites exceed the enumeration limit of {limit}")]
    TooManySites { count: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A contract the algorithm is supposed to guarantee was broken.
    #[error("internal consistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for the errors that mean "this problem instance has no solution".
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleScenario(_)
                | Error::InfeasibleSite { .. }
                | Error::InfeasibleSlot { .. }
                | Error::InsufficientDuration { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
