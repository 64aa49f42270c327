use thiserror::Error;

/// Every failure the library can report. Variants that signal a broken
/// structure carry a rendered counterexample so the caller can reproduce it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("duplicate letter `{0}` in alphabet")]
    DuplicateLetter(String),
    #[error("malformed padded word: component {component} resumes after padding")]
    MalformedPadding { component: usize },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("`{0}` is not a normal form")]
    NotANormalForm(String),
    #[error("stacking value for ({y}, {a}) has length {len} > bound {bound}")]
    BoundViolation { y: String, a: String, len: usize, bound: usize },
    #[error("step limit {limit} exceeded while reducing `{word}`")]
    StepLimitExceeded { limit: u64, word: String },
    #[error("stuck rewrite: phi({y}, {a}) = {a} but the edge is not in the tree")]
    StuckRewrite { y: String, a: String },
    #[error("graph of phi disagrees with phi at ({y}, {a}, {u})")]
    InconsistentGraph { y: String, a: String, u: String },
    #[error("critical pair not joinable: {left} vs {right} (from overlap `{overlap}`)")]
    NotLocallyConfluent { overlap: String, left: String, right: String },
    #[error("no rewriting rule applies to non-tree edge ({y}, {a})")]
    NoApplicableRule { y: String, a: String },
    #[error("bad representative for `{letter}`: {reason}")]
    BadRepresentative { letter: String, reason: String },
    #[error("factorization mismatch: {0}")]
    FactorizationMismatch(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("component language is not prefix-closed: {0}")]
    ComponentNotPrefixClosed(String),
    #[error("deflation is not injective: `{0}` and `{1}` deflate to the same word")]
    DeflationNotInjective(String, String),
    #[error("spec invariant violated: {0}")]
    SpecInvariantViolation(String),
    #[error("k-rewriter failure: {0}")]
    KRewriterFailure(String),
    #[error("inconsistent coset table: {0}")]
    InconsistentCosetTable(String),
    #[error("transversal is not prefix-closed: {0}")]
    NonPrefixClosedTransversal(String),
    #[error("oracle inconsistent: {0}")]
    OracleInconsistent(String),
    #[error("multiplier state is not live: {0}")]
    DeadMultiplierState(String),
    #[error("ball too small: {0}")]
    BallTooSmall(String),
    #[error("ball enumeration exceeded {limit} elements")]
    BallLimitExceeded { limit: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
