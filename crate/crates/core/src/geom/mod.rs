//! Vector, ray and transform algebra, bounding boxes and the sampling
//! primitives every stochastic operation draws from.

mod aabb;
mod sampling;
mod transform;
mod vector;

pub use aabb::{ray_box_intersect, Aabb};
pub(crate) use sampling::stratified_into;
pub use sampling::{fibonacci_sphere, stratified_samples, uniform_cone_dir, uniform_sphere_dir, uniform_sphere_dirs, Rng};
pub use transform::{Mat3, Ray, RigidTransform};
pub use vector::{Dir3, Rgb, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("invalid sampling interval [{t_near}, {t_far}]")]
    InvalidInterval { t_near: f64, t_far: f64 },
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),
}
