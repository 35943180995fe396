use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm is at or below the zero threshold")]
    ZeroVector,
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("quadrature did not converge (difference {diff:e})")]
    QuadratureFailure { diff: f64 },
    #[error("tied observations produce a zero difference vector")]
    TieEncountered,
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("every kernel tuple hits a tie")]
    AllTuplesTied,
    #[error("samples must have equal size ({m} vs {n})")]
    UnequalSizes { m: usize, n: usize },
    #[error("median pairwise distance is zero; bandwidth undefined")]
    ZeroBandwidth,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{splits} label splits exceed the enumeration limit {limit}")]
    TooManySplits { splits: u128, limit: u128 },
    #[error("no reference row gives usable difference vectors")]
    NoUsableReference,
    #[error("weights sum to {0:e}, not zero")]
    WeightsNotBalanced(f64),
    #[error("bad distribution structure: {0}")]
    BadStructure(String),
    #[error("non-finite value in input data")]
    NonFinite,
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
