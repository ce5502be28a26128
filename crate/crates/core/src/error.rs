use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NkError {
    #[error("K = {k} exceeds N-1 = {max}")]
    KTooLarge { k: usize, max: usize },
    #[error("N = {0} is outside the supported range 1..=64")]
    BadLength(usize),
    #[error("alpha = {0} is outside (0, 1]")]
    BadAlpha(f64),
    #[error("table cache requires K+1 <= 24, got K+1 = {0}")]
    TableTooLarge(usize),
    #[error("locus {locus} out of range for N = {n}")]
    LocusOutOfRange { locus: usize, n: usize },
    #[error("window word {word:#x} does not fit in {bits} bits")]
    WordOutOfRange { word: u64, bits: usize },
    #[error("genome length {got} does not match N = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("N = {n} exceeds the scan limit {limit}")]
    ScanLimit { n: usize, limit: usize },
    #[error("constraint set is empty for N = {0}")]
    EmptyConstraint(usize),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid chain configuration: {0}")]
    Chain(String),
}

pub type Result<T> = std::result::Result<T, NkError>;
