use alloc::string::String;

/// Reasons a series cannot be turned into a [`crate::TimeSeries`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("period must be at least 2, got {0}")]
    BadPeriod(usize),
    #[error("series `{id}` has {len} values, needs at least {needed} (two full cycles)")]
    TooShort { id: String, len: usize, needed: usize },
    #[error("series `{id}` has a non-finite value at index {index}")]
    NonFinite { id: String, index: usize },
    #[error("invalid calendar month {year}-{month}")]
    BadMonth { year: i32, month: u32 },
}

/// Failure of a single feature computation. The extractor turns every one
/// of these into a missing entry rather than aborting the vector.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("lag {lag} is too large for a series of length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("series of length {len} is too short, needs {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("partial autocorrelation left [-1, 1] at lag {lag}")]
    DegeneratePacf { lag: usize },
    #[error("segment length {segment} does not fit a series of length {len}")]
    SegmentTooLong { segment: usize, len: usize },
    #[error("quantity is undefined for this input")]
    Undefined,
    #[error("regression design matrix is singular")]
    SingularDesign,
    #[error("model fit failed")]
    FitFailure,
    #[error("optimizer did not converge")]
    OptimizerFailure,
    #[error("decomposition failed")]
    Decomposition,
}

/// Failures of the matrix-level analyses (imputation, scaling, PCA,
/// correlograms, forests, clustering).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("column `{0}` has no present values")]
    AllMissingColumn(String),
    #[error("every column is constant")]
    AllConstantColumns,
    #[error("column `{0}` has zero variance")]
    ZeroVarianceColumn(String),
    #[error("matrix has missing entries")]
    MissingValues,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { got: usize, needed: usize },
    #[error("duplicate row id `{0}`")]
    DuplicateId(String),
    #[error("row has {got} values, expected {expected}")]
    RowLength { got: usize, expected: usize },
    #[error("dissimilarity matrix is not square, symmetric and non-negative with zero diagonal")]
    MalformedDissimilarity,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("labels and rows disagree in length")]
    LabelMismatch,
}
