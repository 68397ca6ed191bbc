use alloc::string::String;

/// Errors raised by the core constructions.
///
/// Point references are indices into the [`MetricSpace`](crate::MetricSpace)
/// they were raised against.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("matrix has {rows} rows but {labels} labels")]
    DimensionMismatch { labels: usize, rows: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("metric space must contain at least one point")]
    EmptySpace,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("nonzero diagonal entry at point {0}")]
    NonZeroDiagonal(usize),
    #[error("asymmetric matrix: d({i},{j}) != d({j},{i})")]
    AsymmetricMatrix { i: usize, j: usize },
    #[error("off-diagonal entry d({i},{j}) is not strictly positive")]
    NegativeOrZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality violated: d({a},{c}) > d({a},{b}) + d({b},{c})")]
    TriangleViolation { a: usize, b: usize, c: usize },
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("scale must be strictly positive")]
    NonPositiveScale,
    #[error("operation needs at least two points")]
    SinglePoint,
    #[error("unknown point label {0:?}")]
    UnknownLabel(String),
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("edge set is not a spanning tree: {0}")]
    NotASpanningTree(&'static str),
    #[error("metric is not 0-hyperbolic (four-point violation at {0:?})")]
    NotZeroHyperbolic([usize; 4]),
    #[error("component has a single boundary point")]
    DegenerateComponent,
    #[error("{n} points exceed the limit of {max} for this method")]
    TooLarge { n: usize, max: usize },
    #[error("ball constraints have no common point (excess {0})")]
    InfeasibleConstraints(String),
    #[error("input map is not 1-Lipschitz on pair ({0},{1})")]
    NotLipschitz(usize, usize),
    #[error("values must have equal dimension; row {0} differs")]
    ValueDimension(usize),
    #[error("parameter {name}={value} out of range for {family}")]
    OutOfRange {
        family: &'static str,
        name: &'static str,
        value: i64,
    },
    #[error("unsupported request: {0}")]
    Unsupported(&'static str),
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("internal bound violated: {0}")]
    BoundViolation(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
