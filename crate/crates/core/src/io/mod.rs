//! File formats and image metrics: scene JSON, dataset manifests, PFM/PNG
//! images, PSNR and SSIM.

mod dataset;
mod image;
mod metrics;
mod scene;

use std::path::{Path, PathBuf};

pub use dataset::{frame_file_name, DatasetFrame, DatasetManifest, DatasetObject, Split, MANIFEST_FILE};
pub use image::{read_image, read_pfm, read_png, tone_map, write_image, write_pfm, write_png, ImageBuffer};
pub use metrics::{mse, psnr, ssim};
pub use scene::{
    load_scene, parse_scene, save_scene, CameraDesc, EnvironmentDesc, FieldSpec, LoadedScene, ObjectDesc,
    SceneDescription, TransformDesc, SCENE_SCHEMA_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error("failed to decode {}: {msg}", path.display())]
    Decode { path: PathBuf, msg: String },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("{0}")]
    Format(String),
    #[error("{}: parse error at line {line}, column {column}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, msg: String },
    #[error("{}: schema error at `{field}`: {msg}", path.display())]
    Schema { path: PathBuf, field: String, msg: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("image too small: {0}")]
    TooSmall(String),
    #[error("invalid scene: {0}")]
    Invalid(String),
}

impl IoError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File { path: path.to_path_buf(), source }
    }
}
