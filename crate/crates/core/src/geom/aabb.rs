use super::{GeomError, Ray, RigidTransform, Vec3};

/// Axis-aligned box, `min <= max` componentwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, GeomError> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(GeomError::InvalidBox("corners must be finite".into()));
        }
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(GeomError::InvalidBox(format!("min {min:?} exceeds max {max:?}")));
        }
        Ok(Self { min, max })
    }

    /// Box centred on the origin with full side lengths `dims`.
    pub fn centered(dims: Vec3) -> Result<Self, GeomError> {
        Self::new(dims * -0.5, dims * 0.5)
    }

    pub fn cube(half: f64) -> Self {
        Self { min: Vec3::splat(-half.abs()), max: Vec3::splat(half.abs()) }
    }

    pub fn min(&self) -> Vec3 {
        self.min
    }

    pub fn max(&self) -> Vec3 {
        self.max
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// World-space box enclosing the transformed corners.
    pub fn transformed(&self, t: &RigidTransform) -> Aabb {
        let corners = self.corners().map(|c| t.apply_point(c));
        let (mut lo, mut hi) = (corners[0], corners[0]);
        for c in &corners[1..] {
            lo = lo.min(*c);
            hi = hi.max(*c);
        }
        Aabb { min: lo, max: hi }
    }
}

/// Slab test. Returns the parametric span `(t_near, t_far)` of the ray inside
/// the box with `t_near` clamped to zero for origins inside; `None` when the
/// ray misses, only grazes, or the box lies behind the origin.
pub fn ray_box_intersect(ray: &Ray, bbox: &Aabb) -> Option<(f64, f64)> {
    let o = ray.origin;
    let d = ray.direction.vec();
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for axis in 0..3 {
        let (lo, hi) = (bbox.min[axis], bbox.max[axis]);
        if d[axis] == 0.0 {
            if o[axis] < lo || o[axis] > hi {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[axis];
        let (mut a, mut b) = ((lo - o[axis]) * inv, (hi - o[axis]) * inv);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t0 = t0.max(a);
        t1 = t1.min(b);
    }
    let t_near = t0.max(0.0);
    if t1 > t_near && t1.is_finite() {
        Some((t_near, t1))
    } else {
        None
    }
}
