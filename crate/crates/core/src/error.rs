use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the model domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("density {value} at {point:?} violates the sampling envelope {bound}")]
    NonfiniteDensity {
        point: Vec<f64>,
        value: f64,
        bound: f64,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is disconnected: node {unreachable} unreachable from {source_node}")]
    DisconnectedGraph {
        source_node: usize,
        unreachable: usize,
    },

    #[error("point count {n} exceeds the configured cap {cap}")]
    SizeCapExceeded { n: usize, cap: usize },

    #[error("distance matrix is already normalized")]
    DoubleNormalization,

    #[error("geodesic left the domain at t = {t}")]
    LeftDomain { t: f64 },

    #[error("grid resolution {res} is too coarse (minimum {min})")]
    GridTooCoarse { res: usize, min: usize },

    #[error("kernel argument must be nonnegative, got {0}")]
    NegativeArgument(f64),

    #[error("weight graph has no off-diagonal edges")]
    EmptyGraph,

    #[error("node {0} has zero degree")]
    ZeroDegree(usize),

    #[error("partition has an empty side")]
    EmptySide,

    #[error("eps = {eps} outside (0, {upper})")]
    EpsOutOfRange { eps: f64, upper: f64 },

    #[error("eigensolver did not converge (tolerance {tolerance:e}, {iterations} iterations)")]
    NotConverged { tolerance: f64, iterations: usize },

    #[error("graph has {components} connected components")]
    Disconnected { components: usize },

    #[error("hypothesis violated: {reason}")]
    HypothesisViolated {
        reason: String,
        witness: Option<Vec<f64>>,
    },

    #[error("explicit step dt = {dt} exceeds stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("k-means produced an empty cluster in every restart")]
    EmptyCluster,

    #[error("{k} clusters exceed the permutation-search limit of {max}")]
    TooManyClusters { k: usize, max: usize },

    #[error("distance matrix truncated at {cutoff}, bandwidth {h} needs larger values")]
    TruncatedDistances { cutoff: f64, h: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that raised it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
