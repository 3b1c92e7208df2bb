use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] bhzeta_core::Error),
    #[error("affine count {count} is not divisible by q - 1 = {}", q - 1)]
    NonDivisible { count: u128, q: u64 },
    #[error("F_{p}^{nu} is too large for table arithmetic")]
    FieldTooLarge { p: u64, nu: u32 },
    #[error("weights {0} do not make W_A weighted homogeneous")]
    BadWeights(String),
    #[error("estimated {ops} operations exceed the budget of {budget}")]
    BudgetExceeded { ops: u128, budget: u128 },
    #[error("unknown fixture {0}")]
    UnknownFixture(String),
    #[error("fixture {id}: {detail}")]
    BadFixture { id: String, detail: String },
    #[error("cache file {path}: {detail}")]
    Cache { path: String, detail: String },
    #[error("precision {requested} is below the automatic minimum {minimum}")]
    PrecisionTooLow { requested: u32, minimum: u32 },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Core(e) => e.code(),
            Error::NonDivisible { .. } => "counting.non_divisible",
            Error::FieldTooLarge { .. } => "counting.field_too_large",
            Error::BadWeights(_) => "counting.bad_weights",
            Error::BudgetExceeded { .. } => "counting.budget_exceeded",
            Error::UnknownFixture(_) => "fixtures.unknown_fixture",
            Error::BadFixture { .. } => "fixtures.bad_fixture",
            Error::Cache { .. } => "cache.invalid",
            Error::PrecisionTooLow { .. } => "cli.precision_too_low",
            Error::Usage(_) => "cli.usage",
            Error::Io(_) => "io",
            Error::Json(_) => "fixtures.json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
