use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{read_image, IoError};
use crate::field::{HomogeneousBox, HomogeneousSphere, LambertianShell, ObjectInstance, ScatteringField};
use crate::geom::{Aabb, Mat3, Rgb, RigidTransform, Vec3};
use crate::neural::MlpField;
use crate::render::{Camera, EnvironmentMap, PointLight, Scene};

pub const SCENE_SCHEMA_VERSION: u32 = 1;

/// On-disk scene. Relative paths resolve against the scene file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDescription {
    pub schema_version: u32,
    #[serde(default)]
    pub objects: Vec<ObjectDesc>,
    #[serde(default)]
    pub lights: Vec<PointLight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Rgb>,
    pub camera: CameraDesc,
}

pub type CameraDesc = Camera;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDesc {
    pub field: FieldSpec,
    #[serde(default)]
    pub transform: TransformDesc,
    /// Full side lengths of the canonical box; defaults to the field's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    HomogeneousSphere { radius: f64, density: f64, albedo: Rgb },
    LambertianShell { radius: f64, thickness: f64, density: f64, albedo: Rgb },
    HomogeneousBox { half_extents: Vec3, density: f64, albedo: Rgb },
    Neural { checkpoint: PathBuf },
}

impl FieldSpec {
    pub fn build(&self, base: &Path) -> Result<Arc<dyn ScatteringField>, IoError> {
        let invalid = |e: crate::field::FieldError| IoError::Invalid(e.to_string());
        Ok(match self {
            FieldSpec::HomogeneousSphere { radius, density, albedo } => {
                Arc::new(HomogeneousSphere::new(*radius, *density, *albedo).map_err(invalid)?)
            }
            FieldSpec::LambertianShell { radius, thickness, density, albedo } => {
                Arc::new(LambertianShell::new(*radius, *thickness, *density, *albedo).map_err(invalid)?)
            }
            FieldSpec::HomogeneousBox { half_extents, density, albedo } => {
                Arc::new(HomogeneousBox::new(*half_extents, *density, *albedo).map_err(invalid)?)
            }
            FieldSpec::Neural { checkpoint } => {
                let path = base.join(checkpoint);
                Arc::new(MlpField::load(&path).map_err(|e| IoError::Invalid(format!("{}: {e}", path.display())))?)
            }
        })
    }
}

/// `world = R(rotation_deg) · (scale · local) + translation`, where
/// `rotation_deg` is an axis-angle vector whose length is the angle in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDesc {
    #[serde(default)]
    pub translation: Vec3,
    #[serde(default)]
    pub rotation_deg: Vec3,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for TransformDesc {
    fn default() -> Self {
        Self { translation: Vec3::ZERO, rotation_deg: Vec3::ZERO, scale: 1.0 }
    }
}

impl TransformDesc {
    pub fn to_transform(&self) -> Result<RigidTransform, IoError> {
        RigidTransform::new(Mat3::from_rotation_vector_deg(self.rotation_deg), self.translation, self.scale)
            .map_err(|e| IoError::Invalid(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentDesc {
    pub path: PathBuf,
    #[serde(default = "one")]
    pub scale: f64,
}

/// A scene resolved into renderable objects.
#[derive(Clone, Debug)]
pub struct LoadedScene {
    pub scene: Scene,
    pub camera: Camera,
    pub background: Rgb,
}

impl SceneDescription {
    pub fn validate(&self) -> Result<(), IoError> {
        if self.schema_version != SCENE_SCHEMA_VERSION {
            return Err(IoError::Invalid(format!(
                "unsupported schema_version {} (expected {SCENE_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.camera.validate().map_err(IoError::Invalid)?;
        for (i, l) in self.lights.iter().enumerate() {
            if l.radiance.0.iter().any(|c| !(*c >= 0.0)) || !l.position.is_finite() {
                return Err(IoError::Invalid(format!("light {i}: radiance must be non-negative and position finite")));
            }
        }
        for (i, o) in self.objects.iter().enumerate() {
            o.transform.to_transform().map_err(|e| IoError::Invalid(format!("object {i}: {e}")))?;
            if let Some(d) = o.bounds {
                Aabb::centered(d).map_err(|e| IoError::Invalid(format!("object {i}: {e}")))?;
            }
        }
        Ok(())
    }

    fn referenced_paths(&self) -> Vec<&Path> {
        let mut paths: Vec<&Path> = self
            .objects
            .iter()
            .filter_map(|o| match &o.field {
                FieldSpec::Neural { checkpoint } => Some(checkpoint.as_path()),
                _ => None,
            })
            .collect();
        if let Some(env) = &self.environment {
            paths.push(&env.path);
        }
        paths
    }

    /// Builds fields and loads the environment map.
    pub fn build(&self, base: &Path) -> Result<LoadedScene, IoError> {
        self.validate()?;
        let mut scene = Scene { lights: self.lights.clone(), ..Default::default() };
        for (i, o) in self.objects.iter().enumerate() {
            let field = o.field.build(base).map_err(|e| IoError::Invalid(format!("object {i}: {e}")))?;
            let transform = o.transform.to_transform()?;
            let obj = match o.bounds {
                Some(d) => ObjectInstance::with_bounds(field, transform, Aabb::centered(d).expect("validated")),
                None => ObjectInstance::new(field, transform),
            };
            scene.objects.push(obj);
        }
        if let Some(env) = &self.environment {
            let img = read_image(&base.join(&env.path))?;
            scene.environment = Some(EnvironmentMap::from_image(&img, env.scale).map_err(IoError::Invalid)?);
        }
        Ok(LoadedScene { scene, camera: self.camera.clone(), background: self.background.unwrap_or(Rgb::BLACK) })
    }
}

/// Parses and validates scene JSON; `origin` only labels errors.
pub fn parse_scene(text: &str, origin: &Path) -> Result<SceneDescription, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let desc: SceneDescription = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            IoError::Schema { path: origin.to_path_buf(), field, msg: inner.to_string() }
        } else {
            IoError::Parse { path: origin.to_path_buf(), line: inner.line(), column: inner.column(), msg: inner.to_string() }
        }
    })?;
    desc.validate()?;
    Ok(desc)
}

/// Reads a scene file and checks that every referenced file exists.
pub fn load_scene(path: &Path) -> Result<SceneDescription, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let desc = parse_scene(&text, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in desc.referenced_paths() {
        let full = base.join(p);
        if !full.exists() {
            return Err(IoError::file(&full, std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file not found")));
        }
    }
    Ok(desc)
}

pub fn save_scene(desc: &SceneDescription, path: &Path) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(desc).map_err(|e| IoError::Format(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| IoError::file(path, e))
}
