//! Error type shared by every module of the crate.
//!
//! All fallible operations return [`Result`]. Variants are grouped by the
//! layer that raises them; messages carry enough context (node ids, times,
//! bounds) to be actionable from the command line.

/// Crate-wide error enum.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A topology query has an empty answer, e.g. asking for paths towards a
    /// target string that does not dominate the source string.
    #[error("no admissible path: target {to:?} does not dominate source {from:?}")]
    EmptyResult { from: String, to: String },

    /// An interval `[a, b]` with `a > b`, or an interval outside `[0, T]`.
    #[error("bad interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },

    /// Two objects that must share a shape (node count, horizon) do not.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A switching path violates admissibility (wrong successor step, or a
    /// path that stops short of the goal before the horizon).
    #[error("not admissible: {context}")]
    NotAdmissible { context: String },

    /// Switching instants are not strictly increasing or leave `[0, T]`.
    #[error("bad times: {context}")]
    BadTimes { context: String },

    /// Terminal cost queried at an interior time on a non-goal node.
    #[error("invalid terminal state: node {node} at t = {t} (interior times are only terminal on the goal node)")]
    InvalidTerminalState { node: usize, t: f64 },

    /// The time grid cannot resolve the location of an inner minimum: the
    /// optimum sits on the first feasible grid point and halving the step
    /// still moves the value materially.
    #[error("grid too coarse: node {node} at grid index {t_idx} (value moved by {delta:.3e} after halving the step)")]
    GridTooCoarse { node: usize, t_idx: usize, delta: f64 },

    /// A map that is only defined at interior decision states was queried on
    /// the boundary (goal node, or t = T).
    #[error("boundary query: {context}")]
    BoundaryQuery { context: String },

    /// A cost coefficient that must be positive is zero or negative.
    #[error("degenerate cost: {context}")]
    DegenerateCost { context: String },

    /// A node sequence is not a path of single-bit switches.
    #[error("not a path: {context}")]
    NotAPath { context: String },

    /// An iterative solve (root finding, fixed point) failed to converge.
    #[error("no convergence: {context}")]
    NonConvergence { context: String },

    /// A time or index outside its admissible range.
    #[error("out of range: {context}")]
    OutOfRange { context: String },

    /// Path enumeration exceeded the configured bound.
    #[error("path enumeration exceeded the configured bound of {bound} paths")]
    PathExplosion { bound: usize },

    /// Plan coefficients are negative, do not sum to one, or sit on pairs
    /// that are not reachable.
    #[error("bad coefficients: {context}")]
    BadCoefficients { context: String },

    /// A congestion slope that must be positive is negative (zero slopes are
    /// accepted but reported by the monotonicity checker).
    #[error("bad slope: slope[{index}] = {value} must be non-negative and finite")]
    BadSlope { index: usize, value: f64 },

    /// Configuration file could not be parsed.
    #[error("config parse error: {message}")]
    ParseError { message: String },

    /// Configuration parsed but failed validation.
    #[error("config validation error: {message}")]
    ValidationError { message: String },

    /// Underlying I/O failure (file read/write).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
