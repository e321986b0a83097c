use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("zero input is not allowed here")]
    ZeroInput,
    #[error("residue {residue} is not coprime to modulus {modulus}")]
    NotCoprime { residue: i64, modulus: u64 },
    #[error("moduli {0} and {1} are not coprime")]
    ModuliNotCoprime(u64, u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("budget exceeded: {what} needs {needed}, cap is {cap}")]
    BudgetExceeded { what: &'static str, needed: u128, cap: u128 },
    #[error("determinant mismatch: expected {expected}, found {found}")]
    DeterminantMismatch { expected: i128, found: i128 },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("polynomial value {value} is not divisible by the declared normalizer {normalizer}")]
    NormalizerMismatch { value: i128, normalizer: u64 },
    #[error("no density available for d = {0}")]
    MissingDensity(u64),
    #[error("residue orbit element set was not retained (orbit size {0})")]
    OrbitSetNotRetained(u64),
    #[error("entry ({row}, {col}) = {value} is not a positive prime")]
    NonPrimeEntry { row: usize, col: usize, value: i64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
