use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a series that is zero to truncation")]
    ZeroDivision,
    #[error("ramification {0} exceeds the cap {1}")]
    RamificationCapExceeded(i64, i64),
    #[error("characteristic roots cannot be separated at the working precision: {0}")]
    ClusterAmbiguity(String),
    #[error("orbit matching is ambiguous: {0}")]
    MatchAmbiguity(String),
    #[error("iterate size budget exceeded: {0}")]
    SizeBudgetExceeded(String),
    #[error("formal-cycle test is inside the tolerance band: {0}")]
    FormalCycleAmbiguity(String),
    #[error("point sits ambiguously at a chart boundary: {0}")]
    ChartFailure(String),
    #[error("cancellation still descending at the truncation boundary")]
    TruncationExhausted,
    #[error("piecewise-linear radius map has no breakpoint")]
    NoBreakpoint,
    #[error("root sits on the ball boundary within matching precision")]
    BoundaryAmbiguity,
    #[error("complex root finder did not converge after {0} iterations")]
    RootFinderNonConvergence(usize),
    #[error("numeric continuation lost track of a cycle: {0}")]
    ContinuationLost(String),
    #[error("no numeric root within the truncation bound: {0}")]
    NoMatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("declared degree {declared} but the map has degree {computed}")]
    DegreeMismatch { declared: usize, computed: usize },
}

impl Error {
    /// Stable machine-readable code, used by the command-line reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroDivision => "E_ZERO_DIVISION",
            Error::RamificationCapExceeded(..) => "E_RAMIFICATION_CAP",
            Error::ClusterAmbiguity(_) => "E_CLUSTER_AMBIGUITY",
            Error::MatchAmbiguity(_) => "E_MATCH_AMBIGUITY",
            Error::SizeBudgetExceeded(_) => "E_SIZE_BUDGET",
            Error::FormalCycleAmbiguity(_) => "E_FORMAL_CYCLE_AMBIGUITY",
            Error::ChartFailure(_) => "E_CHART_FAILURE",
            Error::TruncationExhausted => "E_TRUNCATION_EXHAUSTED",
            Error::NoBreakpoint => "E_NO_BREAKPOINT",
            Error::BoundaryAmbiguity => "E_BOUNDARY_AMBIGUITY",
            Error::RootFinderNonConvergence(_) => "E_ROOT_FINDER",
            Error::ContinuationLost(_) => "E_CONTINUATION_LOST",
            Error::NoMatch(_) => "E_NO_MATCH",
            Error::Precondition(_) => "E_PRECONDITION",
            Error::Syntax { .. } => "E_SYNTAX",
            Error::DegreeMismatch { .. } => "E_DEGREE_MISMATCH",
        }
    }
}
