use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("view {view_id}: {field} has {got} elements, expected {expected}")]
    DimensionMismatch {
        view_id: u32,
        field: String,
        got: usize,
        expected: usize,
    },
    #[error("view {view_id}: non-finite value in {field}")]
    NonFinite { view_id: u32, field: String },
    #[error("view {view_id}: {reason}")]
    InvalidView { view_id: u32, reason: String },
    #[error("unsupported schema version {got} in {path} (expected {expected})")]
    SchemaVersion {
        path: String,
        got: u32,
        expected: u32,
    },
    #[error("gravity indeterminate: no near-horizontal plane within {max_deg} deg of the prior")]
    GravityIndeterminate { max_deg: f64 },
    #[error("empty scene: no structural planes and no objects")]
    EmptyScene,
    #[error("annotator request {request_id} failed: {reason}")]
    Annotator { request_id: u64, reason: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("infeasible object placement: {0}")]
    InfeasiblePlacement(String),
    #[error("ground truth missing: {0}")]
    GroundTruthMissing(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
