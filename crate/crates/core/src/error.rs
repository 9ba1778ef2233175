use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("raster data length {len} does not match {width}x{height}x{channels}")]
    DataLength {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("raster dimensions must be nonzero, got {width}x{height}")]
    EmptyRaster { width: usize, height: usize },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("roi [{x_min},{x_max})x[{y_min},{y_max}) does not fit a {width}x{height} raster")]
    RoiOutOfBounds {
        x_min: usize,
        x_max: usize,
        y_min: usize,
        y_max: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("no row reaches the starting depth")]
    NoStartRow,
    #[error("need at least 3 points with distinct rows, got {0}")]
    InsufficientPoints(usize),
    #[error("every RANSAC sample was degenerate")]
    AllDegenerate,
    #[error("ray does not hit the ground ahead of the camera")]
    HorizonOrAbove,
    #[error("point lies behind the camera")]
    BehindCamera,
    #[error("camera sees no ground")]
    DegenerateCamera,
    #[error("curve does not cross the frame")]
    CurveOutOfFrame,
    #[error("lookahead distance is outside the visible ground")]
    LookaheadNotVisible,
    #[error("capture {capture} appears in more than one split")]
    SplitOverlap { capture: String },
    #[error("empty dataset")]
    EmptyDataset,
}
