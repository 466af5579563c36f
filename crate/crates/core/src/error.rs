use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("image dimensions must be non-zero, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("unsupported channel count {0}, expected 1 or 3")]
    UnsupportedChannels(usize),
    #[error("expected {expected} channel(s), got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("pixel buffer holds {actual} samples, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("box does not intersect the {width}x{height} frame")]
    BoxOutsideFrame { width: usize, height: usize },
    #[error("degenerate box {width}x{height}")]
    DegenerateBox { width: f64, height: f64 },
    #[error("image {width}x{height} is too small, minimum dimension is {min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("patch must be {expected}x{expected}, got {width}x{height}")]
    PatchSize {
        expected: usize,
        width: usize,
        height: usize,
    },
    #[error("histogram bin counts differ ({0} vs {1})")]
    BinMismatch(usize, usize),
    #[error("grid dimensions differ ({0}x{1} vs {2}x{3})")]
    GridMismatch(usize, usize, usize, usize),
    #[error("no keypoints inside the initialization region")]
    NoKeypoints,
    #[error("kernel response map is empty, no center")]
    NoCenter,
    #[error("no candidates to select from")]
    NoCandidates,
    #[error("length mismatch: {results} results vs {ground_truth} ground-truth boxes")]
    LengthMismatch { results: usize, ground_truth: usize },
    #[error("cannot evaluate an empty sequence")]
    EmptySequence,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
