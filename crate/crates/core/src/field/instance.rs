use std::sync::Arc;

use super::{fingerprint_words, FieldResponse, ScatteringField};
use crate::geom::{ray_box_intersect, Aabb, Dir3, Ray, Rgb, RigidTransform, Vec3};

/// A field placed in a scene by a rigid transform with uniform scale.
///
/// World-space densities are the canonical densities divided by the scale, so
/// resizing an object leaves its optical depth unchanged.
#[derive(Clone, Debug)]
pub struct ObjectInstance {
    field: Arc<dyn ScatteringField>,
    transform: RigidTransform,
    bounds: Aabb,
    bounds_world: Aabb,
    key: u64,
}

impl ObjectInstance {
    /// Uses the field's own canonical bounds.
    pub fn new(field: Arc<dyn ScatteringField>, transform: RigidTransform) -> Self {
        let bounds = field.canonical_bounds();
        Self::with_bounds(field, transform, bounds)
    }

    /// Overrides the canonical box, e.g. with user-supplied dimensions.
    pub fn with_bounds(field: Arc<dyn ScatteringField>, transform: RigidTransform, bounds: Aabb) -> Self {
        let bounds_world = bounds.transformed(&transform);
        let rot = transform.rotation().0;
        let key = fingerprint_words(
            [field.fingerprint(), transform.scale().to_bits()]
                .into_iter()
                .chain(transform.translation_part().to_array().map(f64::to_bits))
                .chain(rot.iter().flatten().map(|v| v.to_bits()))
                .chain(bounds.min().to_array().map(f64::to_bits))
                .chain(bounds.max().to_array().map(f64::to_bits)),
        );
        Self { field, transform, bounds, bounds_world, key }
    }

    pub fn field(&self) -> &Arc<dyn ScatteringField> {
        &self.field
    }

    pub fn transform(&self) -> &RigidTransform {
        &self.transform
    }

    pub fn canonical_bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn bounds_world(&self) -> &Aabb {
        &self.bounds_world
    }

    /// Content hash: identical objects share it regardless of list position.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// World-space `(t_near, t_far)` of the ray inside the object's box.
    pub fn intersect(&self, ray: &Ray) -> Option<(f64, f64)> {
        let local = self.transform.to_object_frame(ray);
        let s = self.transform.scale();
        ray_box_intersect(&local, &self.bounds).map(|(a, b)| (a * s, b * s))
    }

    pub fn density(&self, world_pos: Vec3) -> f64 {
        let p = self.transform.inverse_point(world_pos);
        self.field.density(p).max(0.0) / self.transform.scale()
    }

    pub fn scatter(&self, world_pos: Vec3, world_in: Dir3, world_out: Dir3) -> Rgb {
        let p = self.transform.inverse_point(world_pos);
        self.field
            .scatter(p, self.transform.inverse_dir(world_in), self.transform.inverse_dir(world_out))
            .clamp01()
    }

    pub fn query(&self, world_pos: Vec3, world_in: Dir3, world_out: Dir3) -> FieldResponse {
        FieldResponse {
            density: self.density(world_pos),
            scatter_fraction: self.scatter(world_pos, world_in, world_out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldQuery, HomogeneousSphere};
    use crate::geom::Mat3;

    fn sphere() -> Arc<dyn ScatteringField> {
        Arc::new(HomogeneousSphere::new(1.0, 5.0, Rgb::splat(0.8)).unwrap())
    }

    #[test]
    fn identity_matches_direct_query() {
        let f = sphere();
        let obj = ObjectInstance::new(f.clone(), RigidTransform::IDENTITY);
        let p = Vec3::new(0.3, -0.2, 0.5);
        let direct = f.query(&FieldQuery { position: p, incoming_dir: Dir3::X, outgoing_dir: Dir3::Y });
        assert_eq!(obj.query(p, Dir3::X, Dir3::Y), direct);
    }

    #[test]
    fn translated_center_is_interior() {
        let c = Vec3::new(4.0, -1.0, 2.0);
        let obj = ObjectInstance::new(sphere(), RigidTransform::translation(c));
        assert_eq!(obj.density(c), 5.0);
        assert_eq!(obj.density(Vec3::ZERO), 0.0);
    }

    #[test]
    fn scaled_sphere_preserves_optical_depth() {
        // midpoint line integral of sigma along a diameter
        fn depth(obj: &ObjectInstance, half: f64) -> f64 {
            let n = 200_000;
            let h = 2.0 * half / n as f64;
            (0..n)
                .map(|i| obj.density(Vec3::new(-half + (i as f64 + 0.5) * h, 0.0, 0.0)) * h)
                .sum()
        }
        let one = ObjectInstance::new(sphere(), RigidTransform::IDENTITY);
        let two = ObjectInstance::new(sphere(), RigidTransform::new(Mat3::IDENTITY, Vec3::ZERO, 2.0).unwrap());
        let (d1, d2) = (depth(&one, 1.0), depth(&two, 2.0));
        assert!((d1 - 10.0).abs() < 1e-6, "{d1}");
        assert!((d1 - d2).abs() < 1e-6, "{d1} vs {d2}");
    }

    #[test]
    fn world_intersection_accounts_for_scale() {
        let t = RigidTransform::new(Mat3::IDENTITY, Vec3::new(5.0, 0.0, 0.0), 2.0).unwrap();
        let obj = ObjectInstance::new(sphere(), t);
        let (a, b) = obj.intersect(&Ray::new(Vec3::ZERO, Dir3::X)).unwrap();
        assert!((a - 3.0).abs() < 1e-12 && (b - 7.0).abs() < 1e-12);
    }

    #[test]
    fn key_depends_on_content_not_identity() {
        let a = ObjectInstance::new(sphere(), RigidTransform::IDENTITY);
        let b = ObjectInstance::new(sphere(), RigidTransform::IDENTITY);
        let c = ObjectInstance::new(sphere(), RigidTransform::translation(Vec3::ONE));
        assert_eq!(a.key(), b.key());
        assert_ne!(a.key(), c.key());
    }
}
