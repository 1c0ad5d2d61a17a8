//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building or computing on an instance.
#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("adjacency table is not square: row {row} has length {len}, expected {expected}")]
    NonSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("symbol {symbol} has an empty {} in the adjacency table", if *out { "row (no out-edges)" } else { "column (no in-edges)" })]
    EmptyRowOrColumn { symbol: u32, out: bool },
    #[error("adjacency table has no admissible transition")]
    NoEdges,
    #[error("metric base {0} is outside (0, 1)")]
    BadMetricBase(f64),
    #[error("symbol {symbol} is outside the alphabet 0..{alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: u32 },
    #[error("word is shorter than required: length {len}, need at least {need}")]
    WordTooShort { len: usize, need: usize },
    #[error("word {0:?} is not admissible")]
    InadmissibleWord(Vec<u32>),
    #[error("potential range must be >= 1")]
    ZeroRange,
    #[error("missing or non-finite value for admissible word {0:?}")]
    BadPotentialValue(Vec<u32>),
    #[error("tail envelope is not summable below {epsilon} within its domain")]
    EnvelopeNotSummable { epsilon: f64 },
    #[error("countable model rule failed on word {0:?}")]
    RuleFailure(Vec<u32>),
    #[error("shift is not topologically mixing (period {period}, irreducible: {irreducible})")]
    NotMixing { period: u64, irreducible: bool },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e}); at large beta switch to the max-plus solver for the zero-temperature objects")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("positive cycle detected in normalized weights; the supplied maximum cycle mean is not the true maximum")]
    PositiveCycleDetected,
    #[error("sub-action inequality violated on edge {edge}: r = {r:.3e} < -1e-12")]
    SubActionViolated { edge: usize, r: f64 },
    #[error("cycle word is not closed: last-to-first transition inadmissible")]
    CycleNotClosed,
    #[error("need at least {need} sweep records, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ShiftError>;
