use serde::{Deserialize, Serialize};

use crate::geom::{Dir3, Mat3, Ray, Vec3};

/// Pinhole camera. In camera space the view looks down `-z` with `+y` up, so
/// the camera-to-world matrix has columns `[right, up, -forward, position]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub vertical_fov_deg: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn validate(&self) -> Result<(), String> {
        if self.width == 0 || self.height == 0 {
            return Err(format!("camera resolution must be at least 1x1, got {}x{}", self.width, self.height));
        }
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return Err(format!("vertical fov must lie in (0, 180), got {}", self.vertical_fov_deg));
        }
        let fwd = self.look_at - self.position;
        if fwd.normalized().is_none() || fwd.cross(self.up).normalized().is_none() {
            return Err("camera look_at must differ from position and not be parallel to up".into());
        }
        Ok(())
    }

    /// Orthonormal `(right, up, forward)` frame.
    pub fn basis(&self) -> (Dir3, Dir3, Dir3) {
        let fwd = (self.look_at - self.position).normalized().expect("validated camera");
        let right = fwd.vec().cross(self.up).normalized().expect("validated camera");
        let up = right.vec().cross(fwd.vec()).normalized().expect("orthogonal unit vectors");
        (right, up, fwd)
    }

    /// Row-major 4×4 camera-to-world matrix.
    pub fn camera_to_world(&self) -> [[f64; 4]; 4] {
        let (r, u, f) = self.basis();
        let (r, u, b, p) = (r.vec(), u.vec(), -f.vec(), self.position);
        [
            [r.x, u.x, b.x, p.x],
            [r.y, u.y, b.y, p.y],
            [r.z, u.z, b.z, p.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    pub fn from_camera_to_world(m: &[[f64; 4]; 4], vertical_fov_deg: f64, width: usize, height: usize) -> Result<Self, String> {
        let rot = Mat3([
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]);
        if rot.orthonormality_error() > 1e-5 {
            return Err("camera-to-world rotation is not orthonormal".into());
        }
        let position = Vec3::new(m[0][3], m[1][3], m[2][3]);
        let forward = -rot.column(2);
        let cam = Camera {
            position,
            look_at: position + forward,
            up: rot.column(1),
            vertical_fov_deg,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Ray through image position `(px, py)` in pixel units, origin at the
    /// top-left corner; pixel centres sit at half-integers.
    pub fn ray(&self, px: f64, py: f64) -> Ray {
        let (r, u, f) = self.basis();
        let half_h = (self.vertical_fov_deg.to_radians() * 0.5).tan();
        let half_w = half_h * self.width as f64 / self.height as f64;
        let x = (2.0 * px / self.width as f64 - 1.0) * half_w;
        let y = (1.0 - 2.0 * py / self.height as f64) * half_h;
        let d = (r.vec() * x + u.vec() * y + f.vec()).normalized().expect("finite pixel direction");
        Ray::new(self.position, d)
    }

    pub fn pixel_center_ray(&self, x: usize, y: usize) -> Ray {
        self.ray(x as f64 + 0.5, y as f64 + 0.5)
    }

    /// Pixel containing a visible world point, if it projects inside the image.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let (r, u, f) = self.basis();
        let d = p - self.position;
        let z = d.dot(f.vec());
        if z <= 0.0 {
            return None;
        }
        let half_h = (self.vertical_fov_deg.to_radians() * 0.5).tan();
        let half_w = half_h * self.width as f64 / self.height as f64;
        let x = d.dot(r.vec()) / z / half_w;
        let y = d.dot(u.vec()) / z / half_h;
        Some(((x + 1.0) * 0.5 * self.width as f64, (1.0 - y) * 0.5 * self.height as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> Camera {
        Camera {
            position: Vec3::new(0.0, 1.0, 5.0),
            look_at: Vec3::ZERO,
            up: Vec3::new(0.0, 1.0, 0.0),
            vertical_fov_deg: 40.0,
            width: 64,
            height: 48,
        }
    }

    #[test]
    fn central_ray_looks_at_target() {
        let c = cam();
        let ray = c.ray(32.0, 24.0);
        let expect = (c.look_at - c.position).normalized().unwrap();
        assert!((ray.direction.vec() - expect.vec()).length() < 1e-12);
    }

    #[test]
    fn matrix_round_trip() {
        let c = cam();
        let back = Camera::from_camera_to_world(&c.camera_to_world(), c.vertical_fov_deg, c.width, c.height).unwrap();
        for (px, py) in [(0.5, 0.5), (10.0, 30.0), (63.5, 47.5)] {
            let (a, b) = (c.ray(px, py), back.ray(px, py));
            assert!((a.direction.vec() - b.direction.vec()).length() < 1e-12);
            assert!((a.origin - b.origin).length() < 1e-12);
        }
    }

    #[test]
    fn project_inverts_ray() {
        let c = cam();
        let ray = c.ray(13.25, 40.5);
        let (x, y) = c.project(ray.at(3.7)).unwrap();
        assert!((x - 13.25).abs() < 1e-9 && (y - 40.5).abs() < 1e-9);
    }

    #[test]
    fn validate_rejects_degenerate() {
        let mut c = cam();
        c.width = 0;
        assert!(c.validate().is_err());
        let mut c = cam();
        c.up = c.look_at - c.position;
        assert!(c.validate().is_err());
    }
}
