use super::{Dir3, GeomError, Vec3};

/// Half-line `origin + t * direction`, `t >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Dir3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Dir3) -> Self {
        Self { origin, direction }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction.vec() * t
    }

    /// Same ray with the origin moved forward by `eps`.
    pub fn offset(&self, eps: f64) -> Ray {
        Ray::new(self.at(eps), self.direction)
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Rodrigues rotation about `axis` by `angle` radians.
    pub fn from_axis_angle(axis: Dir3, angle: f64) -> Mat3 {
        let Vec3 { x, y, z } = axis.vec();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Rotation whose axis is the direction of `v` and whose angle is `|v|` degrees.
    pub fn from_rotation_vector_deg(v: Vec3) -> Mat3 {
        match v.normalized() {
            Some(axis) => Mat3::from_axis_angle(axis, v.length().to_radians()),
            None => Mat3::IDENTITY,
        }
    }

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest elementwise deviation of `MᵀM` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose().mul_mat(self);
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((p.0[i][j] - target).abs());
            }
        }
        err
    }
}

/// Placement of an object: `world = R · (s · local) + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
    scale: f64,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
        scale: 1.0,
    };

    pub fn new(rotation: Mat3, translation: Vec3, scale: f64) -> Result<Self, GeomError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GeomError::InvalidTransform(format!("uniform scale must be positive, got {scale}")));
        }
        if !translation.is_finite() {
            return Err(GeomError::InvalidTransform("translation is not finite".into()));
        }
        let err = rotation.orthonormality_error();
        if !(err < 1e-6) || rotation.determinant() < 0.0 {
            return Err(GeomError::InvalidTransform(format!(
                "rotation is not a proper orthonormal matrix (deviation {err:e})"
            )));
        }
        Ok(Self { rotation, translation, scale })
    }

    pub fn translation(t: Vec3) -> Self {
        Self { translation: t, ..Self::IDENTITY }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation_part(&self) -> Vec3 {
        self.translation
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt.mul_vec(self.translation) / self.scale),
            scale: 1.0 / self.scale,
        }
    }

    pub fn apply_point(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p * self.scale) + self.translation
    }

    pub fn apply_dir(&self, d: Dir3) -> Dir3 {
        Dir3::new_unchecked(self.rotation.mul_vec(d.vec()))
    }

    pub fn inverse_point(&self, p: Vec3) -> Vec3 {
        self.rotation.transpose().mul_vec(p - self.translation) / self.scale
    }

    pub fn inverse_dir(&self, d: Dir3) -> Dir3 {
        Dir3::new_unchecked(self.rotation.transpose().mul_vec(d.vec()))
    }

    /// Maps a world ray into the object frame. Directions stay unit length, so a
    /// world distance `t` corresponds to `t / scale` along the returned ray.
    pub fn to_object_frame(&self, ray: &Ray) -> Ray {
        Ray::new(self.inverse_point(ray.origin), self.inverse_dir(ray.direction))
    }

    pub fn to_world_frame(&self, ray: &Ray) -> Ray {
        Ray::new(self.apply_point(ray.origin), self.apply_dir(ray.direction))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).abs().max_component() < tol
    }

    #[test]
    fn identity_leaves_ray_unchanged() {
        let ray = Ray::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 1.0, 0.0).normalized().unwrap());
        assert_eq!(RigidTransform::IDENTITY.to_object_frame(&ray), ray);
    }

    #[test]
    fn translation_moves_origin_only() {
        let t = RigidTransform::translation(Vec3::new(1.0, 0.0, 0.0));
        let ray = Ray::new(Vec3::new(1.0, 0.0, 0.0), Dir3::Y);
        let local = t.to_object_frame(&ray);
        assert_eq!(local.origin, Vec3::ZERO);
        assert_eq!(local.direction, Dir3::Y);
    }

    #[test]
    fn rotation_inverse_is_transpose() {
        let r = Mat3::from_axis_angle(Dir3::Z, std::f64::consts::FRAC_PI_2);
        let t = RigidTransform::new(r, Vec3::ZERO, 1.0).unwrap();
        let d = t.inverse_dir(Dir3::X);
        assert!(close(d.vec(), Vec3::new(0.0, -1.0, 0.0), 1e-12));
    }

    #[test]
    fn rejects_bad_scale_and_shear() {
        assert!(RigidTransform::new(Mat3::IDENTITY, Vec3::ZERO, 0.0).is_err());
        assert!(RigidTransform::new(Mat3::IDENTITY, Vec3::ZERO, -1.0).is_err());
        let shear = Mat3([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(RigidTransform::new(shear, Vec3::ZERO, 1.0).is_err());
        let mirror = Mat3([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(RigidTransform::new(mirror, Vec3::ZERO, 1.0).is_err());
    }

    #[test]
    fn double_inverse_is_identity() {
        let r = Mat3::from_rotation_vector_deg(Vec3::new(10.0, -35.0, 70.0));
        let t = RigidTransform::new(r, Vec3::new(0.3, -2.0, 5.0), 2.5).unwrap();
        let tt = t.inverse().inverse();
        for i in 0..3 {
            for j in 0..3 {
                assert!((tt.rotation.0[i][j] - t.rotation.0[i][j]).abs() < 1e-12);
            }
        }
        assert!(close(tt.translation, t.translation, 1e-12));
        assert!((tt.scale - t.scale).abs() < 1e-12);
    }

    #[test]
    fn rotation_vector_zero_is_identity() {
        assert_eq!(Mat3::from_rotation_vector_deg(Vec3::ZERO), Mat3::IDENTITY);
    }
}
