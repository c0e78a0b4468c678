use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("missing required column {column}")]
    MissingColumn { column: String },

    #[error("input contains no parsable data rows ({rows_in} rows read)")]
    EmptyInput { rows_in: usize },

    #[error("input is not valid UTF-8 at byte offset {offset}")]
    Encoding { offset: usize },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("requested {requested} rows but only {available} are available")]
    Bounds { requested: usize, available: usize },

    #[error("predictor {column} is degenerate: {reason}")]
    DegeneratePredictor { column: String, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient residual degrees of freedom: n = {n}, rank = {rank}")]
    InsufficientDf { n: usize, rank: usize },

    #[error("non-finite value in {0}")]
    NumericInput(String),

    #[error("design does not match the fitted model: {0}")]
    SchemaMismatch(String),

    #[error("level {level:?} of {column} was not seen when the model was fitted")]
    UnseenLevel { column: String, level: String },
}

impl Error {
    /// Stable machine-readable identifier, used in service error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingColumn { .. } => "missing_column",
            Error::EmptyInput { .. } => "empty_input",
            Error::Encoding { .. } => "encoding",
            Error::Csv(_) => "malformed_csv",
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Bounds { .. } => "bounds",
            Error::DegeneratePredictor { .. } => "degenerate_predictor",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InsufficientDf { .. } => "insufficient_df",
            Error::NumericInput(_) => "numeric_input",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::UnseenLevel { .. } => "unseen_level",
        }
    }
}
