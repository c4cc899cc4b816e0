use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate year {year}")]
    DuplicateYear { line: usize, year: f64 },

    #[error("line {line}: value {value} is not strictly positive")]
    Domain { line: usize, value: f64 },

    #[error("unknown {kind} '{name}' (valid: {})", valid.join(", "))]
    NotFound {
        kind: &'static str,
        name: String,
        valid: Vec<String>,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate design: all sample years are identical")]
    DegenerateDesign,

    #[error("{model} is at or beyond its singularity at t = {t}")]
    BeyondSingularity { model: String, t: f64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),
}
