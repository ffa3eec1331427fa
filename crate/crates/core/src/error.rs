use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid set descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("projection is not unique (distance {dist} >= prox radius {radius})")]
    AmbiguousProjection { dist: f64, radius: f64 },

    #[error("sample point lies outside the set (distance {dist})")]
    SampleOutsideSet { dist: f64 },

    #[error("base point lies outside the set (distance {dist})")]
    PointOutsideSet { dist: f64 },

    #[error("dilation radius {rho} is not below the prox radius {radius}")]
    RhoTooLarge { rho: f64, radius: f64 },

    #[error("point is at distance {dist} from the target, farther than the jump size {rho}")]
    PointTooFar { dist: f64, rho: f64 },

    #[error("initial point is at distance {dist} from the starting set")]
    InitialPointOutside { dist: f64 },

    #[error("time {t} outside the horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("inadmissible jump at t = {time}: rho = {rho} >= r = {r}")]
    InadmissibleJump { time: f64, rho: f64, r: f64 },

    #[error("catching-up step failed at level {level}, node {node}: {source}")]
    StepProjectionFailure {
        level: u32,
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
