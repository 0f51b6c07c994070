//! Multi-view, multi-light training sets: a `manifest.json` next to a
//! `frames/` directory of linear PFM images.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_image, FieldSpec, ImageBuffer, IoError, TransformDesc};
use crate::geom::{Aabb, Rgb, RigidTransform, Vec3};
use crate::render::{Camera, PointLight};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetObject {
    /// Canonical-to-world placement of the captured object.
    #[serde(default)]
    pub transform: TransformDesc,
    /// Full side lengths of the canonical box.
    pub bounds: Vec3,
    /// Ground-truth field the frames were rendered from, when synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<FieldSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFrame {
    /// Relative to the dataset directory.
    pub image: PathBuf,
    /// Row-major, columns `[right, up, -forward, position]`.
    pub camera_to_world: [[f64; 4]; 4],
    pub light_position: Vec3,
    pub light_radiance: Rgb,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub width: usize,
    pub height: usize,
    pub vertical_fov_deg: f64,
    #[serde(default)]
    pub background: Rgb,
    pub object: DatasetObject,
    pub frames: Vec<DatasetFrame>,
}

impl DatasetFrame {
    pub fn light(&self) -> PointLight {
        PointLight::new(self.light_position, self.light_radiance)
    }
}

impl DatasetManifest {
    pub fn camera(&self, frame: &DatasetFrame) -> Result<Camera, IoError> {
        Camera::from_camera_to_world(&frame.camera_to_world, self.vertical_fov_deg, self.width, self.height)
            .map_err(|e| IoError::Invalid(format!("frame {}: {e}", frame.image.display())))
    }

    pub fn object_transform(&self) -> Result<RigidTransform, IoError> {
        self.object.transform.to_transform()
    }

    pub fn object_bounds(&self) -> Result<Aabb, IoError> {
        Aabb::centered(self.object.bounds).map_err(|e| IoError::Invalid(e.to_string()))
    }

    pub fn frames(&self, split: Split) -> impl Iterator<Item = &DatasetFrame> {
        self.frames.iter().filter(move |f| f.split == split)
    }

    pub fn validate(&self) -> Result<(), IoError> {
        if self.frames.is_empty() {
            return Err(IoError::Invalid("dataset has no frames".into()));
        }
        self.object_transform()?;
        self.object_bounds()?;
        for f in &self.frames {
            self.camera(f)?;
            if f.light_radiance.0.iter().any(|c| !(*c >= 0.0)) {
                return Err(IoError::Invalid(format!("frame {}: negative light radiance", f.image.display())));
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, IoError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| IoError::file(&path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let m: DatasetManifest = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_data() {
                IoError::Schema { path: path.clone(), field, msg: inner.to_string() }
            } else {
                IoError::Parse { path: path.clone(), line: inner.line(), column: inner.column(), msg: inner.to_string() }
            }
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<(), IoError> {
        fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| IoError::Format(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| IoError::file(&path, e))
    }

    /// Reads a frame's image and checks it matches the manifest resolution.
    pub fn load_image(&self, dir: &Path, frame: &DatasetFrame) -> Result<ImageBuffer, IoError> {
        let img = read_image(&dir.join(&frame.image))?;
        if img.width() != self.width || img.height() != self.height {
            return Err(IoError::DimensionMismatch(format!(
                "{} is {}x{}, manifest says {}x{}",
                frame.image.display(),
                img.width(),
                img.height(),
                self.width,
                self.height
            )));
        }
        Ok(img)
    }
}

pub fn frame_file_name(index: usize) -> PathBuf {
    PathBuf::from(format!("frames/{index:04}.pfm"))
}
