use super::{fingerprint_words, FieldError, ScatteringField};
use crate::geom::{Aabb, Dir3, Rgb, Vec3};

fn check_albedo(albedo: Rgb) -> Result<(), FieldError> {
    if albedo.in_unit_range() {
        Ok(())
    } else {
        Err(FieldError::Domain(format!("albedo channels must lie in [0, 1], got {:?}", albedo.0)))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<(), FieldError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FieldError::Domain(format!("{name} must be finite and non-negative, got {v}")))
    }
}

/// Uniform-density ball with isotropic, direction-independent `ρ = albedo`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousSphere {
    radius: f64,
    density: f64,
    albedo: Rgb,
}

impl HomogeneousSphere {
    pub fn new(radius: f64, density: f64, albedo: Rgb) -> Result<Self, FieldError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FieldError::Domain(format!("radius must be positive, got {radius}")));
        }
        check_non_negative("density", density)?;
        check_albedo(albedo)?;
        Ok(Self { radius, density, albedo })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.density
    }

    pub fn albedo(&self) -> Rgb {
        self.albedo
    }

    fn inside(&self, p: Vec3) -> bool {
        p.length_squared() <= self.radius * self.radius
    }
}

impl ScatteringField for HomogeneousSphere {
    fn density(&self, p: Vec3) -> f64 {
        if self.inside(p) {
            self.density
        } else {
            0.0
        }
    }

    fn scatter(&self, p: Vec3, _incoming: Dir3, _outgoing: Dir3) -> Rgb {
        if self.inside(p) {
            self.albedo
        } else {
            Rgb::BLACK
        }
    }

    fn canonical_bounds(&self) -> Aabb {
        Aabb::cube(self.radius)
    }

    fn fingerprint(&self) -> u64 {
        fingerprint_words(
            [1, self.radius.to_bits(), self.density.to_bits()]
                .into_iter()
                .chain(self.albedo.0.map(f64::to_bits)),
        )
    }
}

/// Dense spherical shell whose `ρ` follows Lambert's cosine law with the
/// outward radial normal, giving cosine shading and hard self-shadowing.
#[derive(Clone, Debug, PartialEq)]
pub struct LambertianShell {
    radius: f64,
    thickness: f64,
    density: f64,
    albedo: Rgb,
}

impl LambertianShell {
    pub fn new(radius: f64, thickness: f64, surface_density: f64, albedo: Rgb) -> Result<Self, FieldError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FieldError::Domain(format!("radius must be positive, got {radius}")));
        }
        if !(thickness > 0.0 && thickness < radius) {
            return Err(FieldError::Domain(format!(
                "shell thickness must lie in (0, radius), got {thickness} for radius {radius}"
            )));
        }
        check_non_negative("surface density", surface_density)?;
        check_albedo(albedo)?;
        Ok(Self { radius, thickness, density: surface_density, albedo })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn sigma(&self) -> f64 {
        self.density
    }

    fn in_shell(&self, p: Vec3) -> bool {
        let r2 = p.length_squared();
        let inner = self.radius - self.thickness;
        r2 <= self.radius * self.radius && r2 >= inner * inner
    }
}

impl ScatteringField for LambertianShell {
    fn density(&self, p: Vec3) -> f64 {
        if self.in_shell(p) {
            self.density
        } else {
            0.0
        }
    }

    fn scatter(&self, p: Vec3, incoming: Dir3, _outgoing: Dir3) -> Rgb {
        if !self.in_shell(p) {
            return Rgb::BLACK;
        }
        match p.normalized() {
            Some(n) => self.albedo * n.dot(incoming).max(0.0),
            None => Rgb::BLACK,
        }
    }

    fn canonical_bounds(&self) -> Aabb {
        Aabb::cube(self.radius)
    }

    fn fingerprint(&self) -> u64 {
        fingerprint_words(
            [2, self.radius.to_bits(), self.thickness.to_bits(), self.density.to_bits()]
                .into_iter()
                .chain(self.albedo.0.map(f64::to_bits)),
        )
    }
}

/// Uniform-density box (a slab when one side is thin) with isotropic `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousBox {
    half_extents: Vec3,
    density: f64,
    albedo: Rgb,
}

impl HomogeneousBox {
    pub fn new(half_extents: Vec3, density: f64, albedo: Rgb) -> Result<Self, FieldError> {
        if !(half_extents.x > 0.0 && half_extents.y > 0.0 && half_extents.z > 0.0 && half_extents.is_finite()) {
            return Err(FieldError::Domain(format!("half extents must be positive, got {half_extents:?}")));
        }
        check_non_negative("density", density)?;
        check_albedo(albedo)?;
        Ok(Self { half_extents, density, albedo })
    }

    pub fn half_extents(&self) -> Vec3 {
        self.half_extents
    }

    fn inside(&self, p: Vec3) -> bool {
        let a = p.abs();
        a.x <= self.half_extents.x && a.y <= self.half_extents.y && a.z <= self.half_extents.z
    }
}

impl ScatteringField for HomogeneousBox {
    fn density(&self, p: Vec3) -> f64 {
        if self.inside(p) {
            self.density
        } else {
            0.0
        }
    }

    fn scatter(&self, p: Vec3, _incoming: Dir3, _outgoing: Dir3) -> Rgb {
        if self.inside(p) {
            self.albedo
        } else {
            Rgb::BLACK
        }
    }

    fn canonical_bounds(&self) -> Aabb {
        Aabb::new(-self.half_extents, self.half_extents).expect("positive extents")
    }

    fn fingerprint(&self) -> u64 {
        fingerprint_words(
            [3, self.density.to_bits()]
                .into_iter()
                .chain(self.half_extents.to_array().map(f64::to_bits))
                .chain(self.albedo.0.map(f64::to_bits)),
        )
    }
}
