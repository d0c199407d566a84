use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position outside unit surface (|pos| = {0})")]
    PoseOutsideSurface(f64),
    #[error("looking direction and up vector are zero or parallel")]
    DegenerateBasis,
    #[error("horizontal field of view {0} rad outside (0, π)")]
    InvalidFov(f64),
    #[error("aspect ratio {0} must be positive")]
    InvalidAspect(f64),
    #[error("zero-length vector")]
    ZeroVector,
    #[error("refit boundary ray points behind the new camera position")]
    RefitBehindCamera,
    #[error("frustum corner does not reach the surface in front of the camera")]
    CornerBehindCamera,
    #[error("grid vertex at depth {0} is not in front of the camera")]
    PointBehindCamera(f64),
    #[error("no dolly offset keeps the camera inside the surface")]
    InfeasibleInterval,
    #[error("distortion grid needs at least 2 rows and 2 columns, got {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("invalid output size {0}x{1}")]
    InvalidSize(u32, u32),
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input")]
    EmptyInput,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("malformed csv: {0}")]
    Csv(String),
}
