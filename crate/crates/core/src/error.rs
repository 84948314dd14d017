//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by metric evaluation, solvers, attacks, mechanisms and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A group-conditional metric was evaluated on a dataset where one of the
    /// protected groups is empty.
    #[error("empty group: the dataset has no individuals with a={missing}")]
    EmptyGroup { missing: u8 },

    /// Equal-opportunity style metrics require positives (y=1) in both groups.
    #[error("empty positive group: no individuals with y=1 and a={missing}")]
    EmptyPositiveGroup { missing: u8 },

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value violated a documented input constraint.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Elimination hit a negligible pivot; the system does not have full
    /// column rank.
    #[error("rank-deficient system: pivot for column {column} is below tolerance")]
    RankDeficient { column: usize },

    /// No vector satisfies the solver constraints within the equality
    /// tolerance.
    #[error("infeasible system: no solution satisfies the constraints within eq_tol={eq_tol}")]
    InfeasibleSystem { eq_tol: f64 },

    /// The iterative solver hit its iteration cap before converging.
    #[error("solver did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    /// Greedy selection ran out of usable columns while the residual is still
    /// large.
    #[error("degenerate columns: all remaining correlations are zero but residual {residual} exceeds eq_tol")]
    DegenerateColumn { residual: f64 },

    /// A probe query returned exactly zero, which cannot be inverted into a
    /// group size.
    #[error("zero response: probe query answer is 0 and cannot be inverted")]
    ZeroResponse,

    /// A partition query matched neither candidate magnitude.
    #[error("ambiguous response for individual {index}: |SP|={value} matches neither candidate within tol={tol}")]
    AmbiguousResponse { index: usize, value: f64, tol: f64 },

    /// Parameters outside the domain of a sensitivity formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Brute-force enumeration is capped at small instance sizes.
    #[error("size limit: {what} supports at most {limit}, got {got}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// A mechanism was asked to privatize an already-privatized batch.
    #[error("batch is already privatized")]
    AlreadyPrivatized,

    /// Metric/mechanism combination is not supported.
    #[error("unsupported metric {metric} for {operation}")]
    UnsupportedMetric {
        metric: &'static str,
        operation: &'static str,
    },

    /// CSV parsing failed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A required CSV column is absent.
    #[error("missing required column `{name}`")]
    MissingColumn { name: String },

    /// A column that must be binary-encodable contains an unexpected value.
    #[error("non-binary column `{name}` at line {line}: value `{value}`")]
    NonBinaryColumn {
        name: String,
        line: usize,
        value: String,
    },

    /// Gradient-descent training produced a non-finite loss.
    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    Divergence { epoch: usize },

    /// An error from a batched operation, tagged with the offending row.
    #[error("row {row}: {source}")]
    BatchRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    /// I/O failure, tagged with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Error {
        Error::BatchRow {
            row,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
