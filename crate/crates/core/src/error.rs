use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("dense form needs {sites} interior sites, above the cap of {cap}; use the spectral form")]
    DenseCapExceeded { sites: usize, cap: usize },

    #[error("level {k} out of range 1..={n}")]
    LevelOutOfRange { k: u32, n: u32 },

    #[error("boundary data incomplete: {0}")]
    IncompleteBoundary(String),

    #[error("region is not a rectangle of interior sites: {0}")]
    NonRectangularRegion(String),

    #[error("factorization failed at pivot {index} (value {pivot:e}); matrix is not positive definite")]
    Factorization { index: usize, pivot: f64 },

    #[error("levels are not consecutive: {prev} followed by {next}")]
    NonConsecutiveLevels { prev: u32, next: u32 },

    #[error("degenerate design matrix: {0}")]
    DegenerateDesign(String),

    #[error("grid does not cover the support: {0}")]
    GridCoverage(String),

    #[error("work budget exceeded: {needed} leaf visits requested, budget {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("persisted row for n={n} has {found} samples, config asks for {expected}")]
    ResumeMismatch { n: u32, found: usize, expected: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
