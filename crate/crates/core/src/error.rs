use thiserror::Error;

/// Errors raised by the engine. Audits never raise these; they record failures instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("lattice rank mismatch: expected {expected}, got {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("lattice rank must be at least 1")]
    ZeroRank,

    #[error("class {0} lies outside the positive cone")]
    OutsideCone(String),

    #[error("class {0} is not a nonzero effective class")]
    NotEffective(String),

    #[error("sequence of classes must be nonempty")]
    EmptySequence,

    #[error("invalid insertion positions n={n}, k={k}, m={m}: need 1 <= k < m <= n")]
    InvalidPositions { n: usize, k: usize, m: usize },

    #[error("unsupported rank d={0}: only d in {{1,2}} is assembled")]
    UnsupportedRank(u32),

    #[error("pairing antisymmetry violated at ({0},{1})")]
    PairingAntisymmetry(usize, usize),

    #[error("pairing shape invalid: {0}")]
    PairingShape(String),

    #[error("generator {0} has no image under the integration map")]
    NoImage(String),

    #[error("integer overflow while evaluating the Euler pairing")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
