use thiserror::Error;

/// Errors raised anywhere in the removal pipeline, metrics, or learner.
#[derive(Debug, Error)]
pub enum UmbraError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient strokes: {0}")]
    InsufficientStrokes(String),

    #[error("conflicting strokes: {} pixel(s) labeled both shadow and lit", .pixels.len())]
    ConflictingStrokes { pixels: Vec<(u32, u32)> },

    #[error("degenerate fusion: stroke pixels have no variance under any fusing factors")]
    DegenerateFusion,

    #[error("no shadow: {0}")]
    NoShadow(String),

    #[error("degenerate sample: zero gradient at boundary point ({x:.1}, {y:.1})")]
    DegenerateSample { x: f64, y: f64 },

    #[error("no valid samples: {0}")]
    NoValidSamples(String),

    #[error("no scales to propagate")]
    NoScales,

    #[error("invalid image pair: {0}")]
    InvalidPair(String),

    #[error("shadow-free case: original error is zero, ratio undefined")]
    ShadowFree,

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Codec(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl UmbraError {
    /// True for failures of the environment (files, codecs) as opposed to
    /// validation or domain failures.
    pub fn is_io(&self) -> bool {
        matches!(self, UmbraError::Io(_) | UmbraError::Codec(_))
    }
}

impl From<image::ImageError> for UmbraError {
    fn from(e: image::ImageError) -> Self {
        match e {
            image::ImageError::IoError(io) => UmbraError::Io(io),
            other => UmbraError::Codec(other.to_string()),
        }
    }
}

pub type Result<T, E = UmbraError> = std::result::Result<T, E>;
