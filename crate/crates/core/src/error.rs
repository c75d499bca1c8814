use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("pitch {0} rad is outside [-pi/2, pi/2]")]
    PitchOutOfRange(f64),

    #[error("zero-length direction vector")]
    ZeroDirection,

    #[error("invalid equirectangular image: {0}")]
    InvalidImage(String),

    #[error("invalid view: {0}")]
    InvalidView(String),

    #[error("classifier input rejected: {0}")]
    ClassifierInput(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate prediction for frame {frame_id:?} view {view_index}")]
    DuplicatePrediction { frame_id: String, view_index: usize },

    #[error("score {0} outside [0, 1]")]
    ScoreRange(f64),

    #[error("missing prediction for frame {frame_id:?} view {view_index}")]
    MissingPrediction { frame_id: String, view_index: usize },

    #[error("invalid aggregation input: {0}")]
    Aggregation(String),

    #[error("invalid annotation: {0}")]
    Annotation(String),

    #[error("negative walking distance {0} s")]
    NegativeDistance(f64),

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("pose is not in free space: {0}")]
    PoseBlocked(String),

    #[error("could not construct a valid scene after {0} attempts")]
    RngExhausted(usize),

    #[error("empty decision sequence")]
    EmptySequence,

    #[error("evaluation mismatch: {0}")]
    Evaluation(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
