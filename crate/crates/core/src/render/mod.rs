//! Volumetric integrators over scenes of placed scattering fields.
//!
//! A camera ray is clipped against every object's box, each hit object is
//! marched independently, and the samples of all objects are merged by
//! distance before front-to-back compositing:
//!
//! `L = Σ_m α_m τ_m L_s(x_m, ω_o) + τ_end · L_background`
//!
//! `L_s` sums every point light (`ρ · radiance`, times shadow transmittance
//! when the mode has shadows) and adds the average over `K` sphere directions
//! of `ρ · L_in`, where `L_in` recurses into a secondary ray when the mode has
//! indirect light and the bounce budget allows, or otherwise reads the
//! environment map. The uniform-sphere pdf is not divided out: the
//! average is a plain mean over directions, like the point-light sum it
//! complements.
//!
//! Shadow and secondary rays leave the object they start in out of the
//! march; light transport inside one object is the field's own business.

mod camera;
mod environment;
mod samples;
mod tracer;

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use camera::Camera;
pub use environment::EnvironmentMap;
pub use samples::{alpha, interval_widths, march_object, RaySample, RaySampleSet};
use tracer::{Plan, Tracer};

use crate::field::ObjectInstance;
use crate::geom::{Dir3, Ray, Rgb, Rng, Vec3};
use crate::io::ImageBuffer;

/// Hard cap on recursion depth.
pub const MAX_BOUNCES_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render settings: {0}")]
    Settings(String),
    #[error("invalid camera: {0}")]
    Camera(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLight {
    pub position: Vec3,
    #[serde(default = "white")]
    pub radiance: Rgb,
}

fn white() -> Rgb {
    Rgb::WHITE
}

impl PointLight {
    pub fn new(position: Vec3, radiance: Rgb) -> Self {
        Self { position, radiance }
    }

    pub fn white(position: Vec3) -> Self {
        Self::new(position, Rgb::WHITE)
    }
}

/// The four lighting variants used for ablations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    /// Point lights without occlusion by other objects.
    DirectOnly,
    /// Point lights attenuated by shadow rays.
    DirectShadows,
    /// Unshadowed point lights plus inter-object indirect light.
    IndirectOnly,
    /// Shadowed point lights plus indirect light.
    #[default]
    Full,
}

impl RenderMode {
    pub const ALL: [RenderMode; 4] =
        [RenderMode::DirectOnly, RenderMode::DirectShadows, RenderMode::IndirectOnly, RenderMode::Full];

    pub fn shadows(self) -> bool {
        matches!(self, RenderMode::DirectShadows | RenderMode::Full)
    }

    pub fn indirect(self) -> bool {
        matches!(self, RenderMode::IndirectOnly | RenderMode::Full)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RenderMode::DirectOnly => "direct_only",
            RenderMode::DirectShadows => "direct_shadows",
            RenderMode::IndirectOnly => "indirect_only",
            RenderMode::Full => "full",
        }
    }
}

impl FromStr for RenderMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RenderMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}; expected one of direct_only, direct_shadows, indirect_only, full"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightFalloff {
    /// Point lights deliver their radiance at any distance.
    #[default]
    None,
    InverseSquare,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSettings {
    pub samples_per_object: usize,
    pub shadow_samples: usize,
    pub indirect_dirs: usize,
    pub max_bounces: usize,
    pub mode: RenderMode,
    pub shadow_epsilon: f64,
    pub background: Rgb,
    /// Compositing stops once transmittance falls below this.
    pub min_transmittance: f64,
    pub light_falloff: LightFalloff,
    /// Rays per pixel; more than one jitters inside the pixel.
    pub pixel_samples: usize,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            samples_per_object: 192,
            shadow_samples: 192,
            indirect_dirs: 20,
            max_bounces: 2,
            mode: RenderMode::Full,
            shadow_epsilon: 1e-3,
            background: Rgb::BLACK,
            min_transmittance: 1e-4,
            light_falloff: LightFalloff::None,
            pixel_samples: 1,
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<(), RenderError> {
        let err = |m: String| Err(RenderError::Settings(m));
        for (name, v) in [
            ("samples_per_object", self.samples_per_object),
            ("shadow_samples", self.shadow_samples),
            ("indirect_dirs", self.indirect_dirs),
            ("max_bounces", self.max_bounces),
            ("pixel_samples", self.pixel_samples),
        ] {
            if v == 0 {
                return err(format!("{name} must be at least 1"));
            }
        }
        if self.max_bounces > MAX_BOUNCES_LIMIT {
            return err(format!("max_bounces is capped at {MAX_BOUNCES_LIMIT}, got {}", self.max_bounces));
        }
        if !(self.shadow_epsilon >= 0.0 && self.shadow_epsilon.is_finite()) {
            return err(format!("shadow_epsilon must be non-negative, got {}", self.shadow_epsilon));
        }
        if !(0.0..1.0).contains(&self.min_transmittance) {
            return err(format!("min_transmittance must lie in [0, 1), got {}", self.min_transmittance));
        }
        if self.background.0.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return err("background must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Quadrature parameters of the deterministic reference renderer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceSettings {
    /// Midpoint samples per object on camera rays.
    pub samples: usize,
    /// Midpoint samples per object on shadow rays from camera-ray samples.
    pub shadow_samples: usize,
    /// Midpoint samples per object on secondary rays and their shadow rays.
    pub secondary_samples: usize,
    /// Fixed spiral directions replacing the random sphere directions.
    pub directions: usize,
    /// In-scattering evaluations per object span on camera rays; the
    /// transmittance is still resolved at every sample and each evaluation is
    /// weighted by the compositing mass of its run of samples.
    pub shading_nodes: usize,
    pub secondary_shading_nodes: usize,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        Self {
            samples: 4096,
            shadow_samples: 4096,
            secondary_samples: 512,
            directions: 512,
            shading_nodes: 256,
            secondary_shading_nodes: 64,
        }
    }
}

impl ReferenceSettings {
    /// Shades every sample: a plain midpoint rule with no grouping.
    pub fn exhaustive(samples: usize, directions: usize) -> Self {
        Self {
            samples,
            shadow_samples: samples,
            secondary_samples: samples,
            directions,
            shading_nodes: samples,
            secondary_shading_nodes: samples,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Scene {
    pub objects: Vec<ObjectInstance>,
    pub lights: Vec<PointLight>,
    pub environment: Option<EnvironmentMap>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RayCounts {
    pub primary: u64,
    pub shadow: u64,
    pub secondary: u64,
    pub field_queries: u64,
}

impl RayCounts {
    pub fn total_rays(&self) -> u64 {
        self.primary + self.shadow + self.secondary
    }

    fn add(&mut self, o: &RayCounts) {
        self.primary += o.primary;
        self.shadow += o.shadow;
        self.secondary += o.secondary;
        self.field_queries += o.field_queries;
    }
}

#[derive(Clone, Debug, Default)]
pub struct RenderStats {
    /// Rays of every kind traced for each pixel, row-major.
    pub rays_per_pixel: Vec<u64>,
    pub totals: RayCounts,
}

/// Radiance along a ray of generation `bounce_depth` (0 for camera rays).
pub fn render_ray(scene: &Scene, ray: &Ray, settings: &RenderSettings, rng: &Rng, bounce_depth: usize) -> Rgb {
    Tracer::new(scene, settings, Plan::Stochastic).radiance(ray, bounce_depth, None, rng)
}

/// Fraction of light from `light_pos` reaching `point` through every object
/// except `exclude`.
pub fn shadow_transmittance(
    scene: &Scene,
    point: Vec3,
    light_pos: Vec3,
    exclude: Option<usize>,
    settings: &RenderSettings,
    rng: &mut Rng,
) -> f64 {
    let to = light_pos - point;
    let Some(dir) = to.normalized() else { return 1.0 };
    Tracer::new(scene, settings, Plan::Stochastic).shadow(point, dir, to.length(), exclude, 0, rng)
}

/// Point-light contribution to `L_s` at a point of object `object_id`.
pub fn direct_radiance(
    scene: &Scene,
    object_id: usize,
    point: Vec3,
    outgoing: Dir3,
    settings: &RenderSettings,
    rng: &Rng,
) -> Rgb {
    Tracer::new(scene, settings, Plan::Stochastic).direct(object_id, point, outgoing, 0, rng)
}

/// Sphere-gathered contribution to `L_s`; black once the bounce budget is
/// spent and no environment map is present.
pub fn indirect_radiance(
    scene: &Scene,
    object_id: usize,
    point: Vec3,
    outgoing: Dir3,
    settings: &RenderSettings,
    bounce_depth: usize,
    rng: &Rng,
) -> Rgb {
    Tracer::new(scene, settings, Plan::Stochastic).indirect(object_id, point, outgoing, bounce_depth, rng)
}

/// Merged, sorted samples along a camera ray, as used for compositing.
pub fn ray_samples(scene: &Scene, ray: &Ray, settings: &RenderSettings, rng: &Rng) -> RaySampleSet {
    let samples = Tracer::new(scene, settings, Plan::Stochastic).gather_samples(ray, 0, None, rng);
    RaySampleSet { samples }
}

/// Monte Carlo render. Pixel `i` (row-major) draws from
/// `Rng::new(seed).derive(i)`, so the image does not depend on scheduling.
pub fn render_image(
    scene: &Scene,
    camera: &Camera,
    settings: &RenderSettings,
    seed: u64,
) -> Result<(ImageBuffer, RenderStats), RenderError> {
    settings.validate()?;
    camera.validate().map_err(RenderError::Camera)?;
    let root = Rng::new(seed);
    let (w, h) = (camera.width, camera.height);
    let pixels: Vec<(Rgb, RayCounts)> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (idx % w, idx / w);
            let pixel_rng = root.derive(idx as u64);
            let mut tracer = Tracer::new(scene, settings, Plan::Stochastic);
            let mut sum = Rgb::BLACK;
            for s in 0..settings.pixel_samples {
                let mut rng = pixel_rng.derive(s as u64);
                let ray = if settings.pixel_samples == 1 {
                    camera.pixel_center_ray(x, y)
                } else {
                    camera.ray(x as f64 + rng.uniform(), y as f64 + rng.uniform())
                };
                tracer.counts.primary += 1;
                sum += tracer.radiance(&ray, 0, None, &rng);
            }
            (sum / settings.pixel_samples as f64, tracer.counts)
        })
        .collect();
    Ok(assemble(w, h, pixels))
}

/// Deterministic brute-force render: dense midpoint quadrature along every ray
/// and a fixed spiral direction set in place of random sphere sampling.
pub fn render_reference(
    scene: &Scene,
    camera: &Camera,
    settings: &RenderSettings,
    reference: &ReferenceSettings,
) -> Result<ImageBuffer, RenderError> {
    settings.validate()?;
    camera.validate().map_err(RenderError::Camera)?;
    if reference.samples == 0 || reference.secondary_samples == 0 || reference.shadow_samples == 0 || reference.directions == 0 {
        return Err(RenderError::Settings("reference sample counts must be at least 1".into()));
    }
    let dirs: std::sync::Arc<[Dir3]> = crate::geom::fibonacci_sphere(reference.directions).into();
    let (w, h) = (camera.width, camera.height);
    let unused = Rng::new(0);
    let pixels: Vec<(Rgb, RayCounts)> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let mut tracer = Tracer::with_directions(scene, settings, Plan::Reference(*reference), Some(dirs.clone()));
            tracer.counts.primary += 1;
            let c = tracer.radiance(&camera.pixel_center_ray(idx % w, idx / w), 0, None, &unused);
            (c, tracer.counts)
        })
        .collect();
    Ok(assemble(w, h, pixels).0)
}

/// Reference radiance along a single ray.
pub fn reference_ray(scene: &Scene, ray: &Ray, settings: &RenderSettings, reference: &ReferenceSettings) -> Rgb {
    Tracer::new(scene, settings, Plan::Reference(*reference)).radiance(ray, 0, None, &Rng::new(0))
}

fn assemble(w: usize, h: usize, pixels: Vec<(Rgb, RayCounts)>) -> (ImageBuffer, RenderStats) {
    let mut img = ImageBuffer::new(w, h);
    let mut stats = RenderStats { rays_per_pixel: Vec::with_capacity(w * h), totals: RayCounts::default() };
    for (idx, (c, counts)) in pixels.into_iter().enumerate() {
        img.set(idx % w, idx / w, c);
        stats.rays_per_pixel.push(counts.total_rays());
        stats.totals.add(&counts);
    }
    (img, stats)
}
