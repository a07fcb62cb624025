use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layer list is empty")]
    EmptyLayers,
    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{layers} layers but {weights} weights")]
    WeightCountMismatch { layers: usize, weights: usize },
    #[error("layer `{name}` contains value {value} (only 0 and 1 are allowed)")]
    NonBinaryLayer { name: String, value: i64 },
    #[error("downsampling factor must be at least 1")]
    ZeroFactor,
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("ring neighborhood is empty for d_min={d_min}, d_max={d_max}, theta_alpha={theta_alpha}")]
    EmptyRing {
        d_min: f64,
        d_max: f64,
        theta_alpha: f64,
    },
    #[error("{which} ({x},{y}) is outside the {rows}x{cols} raster")]
    OutOfBounds {
        which: &'static str,
        x: usize,
        y: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{which} forbidden")]
    Forbidden { which: &'static str },
    #[error("source and target coincide")]
    SourceIsTarget,
    #[error("{which} is isolated: no feasible pylon span touches it")]
    Isolated { which: &'static str },
    #[error("target is unreachable from the source")]
    Unreachable,
    #[error("bresenham endpoints coincide")]
    DegenerateSegment,
    #[error("edges are not incident")]
    NotIncident,
    #[error("empty path")]
    EmptyPath,
    #[error("need at least {needed} candidates, got {got}")]
    TooFewCandidates { needed: usize, got: usize },
    #[error("no feasible path at scale {scale}: {reason}")]
    ScaleInfeasible { scale: usize, reason: String },
    #[error("edge budget {budget} exceeded at scale {scale}: {edges} edges")]
    BudgetExceeded {
        scale: usize,
        edges: usize,
        budget: usize,
    },
    #[error("grid parse error at line {line}: {reason}")]
    GridParse { line: usize, reason: String },
    #[error("corrupt predecessor map: {0}")]
    CorruptPredecessors(String),
}

impl Error {
    /// Input did not describe a valid problem (as opposed to a valid but infeasible one).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Isolated { .. }
                | Error::Unreachable
                | Error::ScaleInfeasible { .. }
                | Error::BudgetExceeded { .. }
                | Error::CorruptPredecessors(_)
                | Error::TooFewCandidates { .. }
        )
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Isolated { .. }
                | Error::Unreachable
                | Error::ScaleInfeasible { .. }
                | Error::BudgetExceeded { .. }
                | Error::TooFewCandidates { .. }
        )
    }
}
