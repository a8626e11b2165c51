use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    /// The grid does not put enough nodes inside the potential's smallest feature.
    #[error("grid unresolved: {nodes} nodes across a feature of width {feature}, need at least {required}")]
    Resolution {
        nodes: usize,
        feature: f64,
        required: usize,
    },

    #[error("no convergence in {what} after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    /// Numerical error is too large compared to the quantity it qualifies.
    #[error("gap {gap:e} is not resolved: error estimate {error:e}")]
    Precision { gap: f64, error: f64 },

    #[error("root not bracketed on [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    #[error("fit window holds {rows} rows, need at least {required}")]
    Window { rows: usize, required: usize },

    /// The potential is outside the class a check is stated for.
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, GapError>;
