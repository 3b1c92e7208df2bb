use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows} rows, row {bad} has {len} entries)")]
    NonSquare { rows: usize, bad: usize, len: usize },
    #[error("matrix has zero determinant")]
    ZeroDeterminant,
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: i64 },
    #[error("matrix does not decompose into Fermat, chain and loop atoms")]
    NotDecomposable,
    #[error("charge vector has a non-positive entry at index {index}")]
    NonPositiveWeight { index: usize },
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sector gamma A^-1 = {0} has no representative in [0, 1]^n of the same dual age")]
    NoBoxRepresentative(String),
    #[error("Jacobian ideal has finite colength {found}, expected Milnor number {expected}")]
    NotIsolated { expected: i64, found: i64 },
    #[error("p-adic precision exhausted: {context}")]
    PrecisionExhausted { context: String },
    #[error("argument {num}/{den} does not have denominator dividing p-1 = {pm1}")]
    DenominatorMismatch { num: i64, den: i64, pm1: u64 },
    #[error("argument has a denominator divisible by p")]
    NotPadicUnit,
    #[error("tuple has an integral entry at index {index}")]
    DegenerateTuple { index: usize },
    #[error("integer reconstruction needs precision N >= {needed}, have {have}")]
    InsufficientPrecision { needed: u32, have: u32 },
    #[error("P_{k} has a coefficient outside its Weil bound after lifting")]
    ReconstructionFailed { k: u32 },
    #[error("potential is not homogeneous")]
    NotHomogeneous,
    #[error("degree |gamma A^-1| = {0} is not an integer")]
    NonIntegralDegree(String),
    #[error("coordinate {0} of gamma A^-1 lies outside [0, 1]")]
    OutsideBox(String),
    #[error("residual term without a cancelling partner: {detail}")]
    UnpairedTerm { detail: String },
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

impl Error {
    /// Stable module-qualified code used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "matrix.non_square",
            Error::ZeroDeterminant => "matrix.zero_determinant",
            Error::NegativeEntry { .. } => "matrix.negative_entry",
            Error::NotDecomposable => "matrix.not_decomposable",
            Error::NonPositiveWeight { .. } => "matrix.non_positive_weight",
            Error::DimensionMismatch { .. } => "matrix.dimension_mismatch",
            Error::NotIsolated { .. } => "milnor.not_isolated",
            Error::NoBoxRepresentative(_) => "milnor.no_box_representative",
            Error::PrecisionExhausted { .. } => "padic.precision_exhausted",
            Error::DenominatorMismatch { .. } => "padic.denominator_mismatch",
            Error::NotPadicUnit => "padic.not_unit",
            Error::DegenerateTuple { .. } => "charsum.degenerate_tuple",
            Error::InsufficientPrecision { .. } => "spectrum.insufficient_precision",
            Error::ReconstructionFailed { .. } => "spectrum.reconstruction_failed",
            Error::NotHomogeneous => "mw.not_homogeneous",
            Error::NonIntegralDegree(_) => "mw.non_integral_degree",
            Error::OutsideBox(_) => "mw.outside_box",
            Error::UnpairedTerm { .. } => "mw.unpaired_term",
            Error::NotPrime(_) => "padic.not_prime",
            Error::Overflow(_) => "core.overflow",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
