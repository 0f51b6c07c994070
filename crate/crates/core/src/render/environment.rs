use crate::geom::{Dir3, Rgb};
use crate::io::ImageBuffer;

/// Equirectangular radiance map at infinity.
///
/// Rows sample the polar angle `θ = acos(z)`: row `i` sits at
/// `θ = π (i + 0.5) / height`, clamped at the poles. Columns sample the azimuth
/// `φ = atan2(y, x)` wrapped to `[0, 2π)`: column `j` sits at
/// `φ = 2π j / width`, wrapping around. Lookups are bilinear.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentMap {
    width: usize,
    height: usize,
    texels: Vec<Rgb>,
    scale: f64,
}

impl EnvironmentMap {
    pub fn new(width: usize, height: usize, texels: Vec<Rgb>, scale: f64) -> Result<Self, String> {
        if width == 0 || height == 0 {
            return Err("environment map must be at least 1x1".into());
        }
        if texels.len() != width * height {
            return Err(format!("expected {} texels, got {}", width * height, texels.len()));
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(format!("environment scale must be non-negative, got {scale}"));
        }
        if texels.iter().any(|t| t.0.iter().any(|c| !(*c >= 0.0 && c.is_finite()))) {
            return Err("environment texels must be finite and non-negative".into());
        }
        Ok(Self { width, height, texels, scale })
    }

    pub fn constant(c: Rgb, scale: f64) -> Result<Self, String> {
        Self::new(1, 1, vec![c], scale)
    }

    pub fn from_image(img: &ImageBuffer, scale: f64) -> Result<Self, String> {
        let texels = (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .map(|(x, y)| img.get(x, y))
            .collect();
        Self::new(img.width(), img.height(), texels, scale)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn texel(&self, col: usize, row: usize) -> Rgb {
        self.texels[row * self.width + col]
    }

    pub fn radiance(&self, dir: Dir3) -> Rgb {
        let (theta, phi) = dir.to_spherical();
        let v = (theta / std::f64::consts::PI * self.height as f64 - 0.5).clamp(0.0, (self.height - 1) as f64);
        let u = phi / std::f64::consts::TAU * self.width as f64;
        let (r0, fv) = (v.floor() as usize, v - v.floor());
        let r1 = (r0 + 1).min(self.height - 1);
        let (c0, fu) = ((u.floor() as usize) % self.width, u - u.floor());
        let c1 = (c0 + 1) % self.width;
        let top = self.texel(c0, r0) * (1.0 - fu) + self.texel(c1, r0) * fu;
        let bottom = self.texel(c0, r1) * (1.0 - fu) + self.texel(c1, r1) * fu;
        (top * (1.0 - fv) + bottom * fv) * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rng, Vec3};

    #[test]
    fn constant_map() {
        let env = EnvironmentMap::constant(Rgb::WHITE, 2.5).unwrap();
        let mut rng = Rng::new(0);
        for _ in 0..100 {
            assert_eq!(env.radiance(crate::geom::uniform_sphere_dir(&mut rng)), Rgb::splat(2.5));
        }
    }

    #[test]
    fn pole_maps_to_top_row() {
        let texels = vec![Rgb::new(1.0, 0.0, 0.0), Rgb::new(0.0, 0.0, 1.0)];
        let env = EnvironmentMap::new(1, 2, texels, 1.0).unwrap();
        assert_eq!(env.radiance(Dir3::Z), Rgb::new(1.0, 0.0, 0.0));
        assert_eq!(env.radiance(-Dir3::Z), Rgb::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn azimuth_zero_is_first_column() {
        let texels = vec![Rgb::new(1.0, 0.0, 0.0), Rgb::new(0.0, 1.0, 0.0)];
        let env = EnvironmentMap::new(2, 1, texels, 1.0).unwrap();
        assert_eq!(env.radiance(Dir3::X), Rgb::new(1.0, 0.0, 0.0));
        assert_eq!(env.radiance(-Dir3::X), Rgb::new(0.0, 1.0, 0.0));
        // halfway between the two columns
        let c = env.radiance(Vec3::new(0.0, 1.0, 0.0).normalized().unwrap());
        assert!((c.r() - 0.5).abs() < 1e-12 && (c.g() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_and_negative() {
        assert!(EnvironmentMap::new(0, 1, vec![], 1.0).is_err());
        assert!(EnvironmentMap::new(1, 1, vec![Rgb::splat(-1.0)], 1.0).is_err());
    }
}
