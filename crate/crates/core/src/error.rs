use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("mesh has zero surface area")]
    ZeroArea,
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("unsupported feature in {path}: {msg}")]
    UnsupportedFeature { path: PathBuf, msg: String },
    #[error("object projects to no pixels")]
    EmptySilhouette,
    #[error("mesh does not intersect the voxel window")]
    OutOfWindow,
    #[error("no branch observes any voxel")]
    NoObservations,
    #[error("isolevel {0} is never crossed")]
    NoCrossing(f64),
    #[error("voxel grids disagree on frame: {0} vs {1}")]
    FrameMismatch(String, String),
    #[error("voxel grids disagree on dims: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("images disagree on resolution: {0}x{1} vs {2}x{3}")]
    ResolutionMismatch(usize, usize, usize, usize),
    #[error("ground-truth silhouette mask is empty")]
    EmptyMask,
    #[error("predictor used before fit")]
    NotFitted,
    #[error("gallery is empty")]
    EmptyGallery,
    #[error("inconsistent gallery: {0}")]
    InconsistentGallery(String),
    #[error("oracle has no entry for this input")]
    OracleMiss,
    #[error("not enough data to build splits: {0}")]
    InsufficientData(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
