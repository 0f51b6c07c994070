use std::sync::Arc;

use super::samples::{alpha, interval_widths, push_forward_difference, push_midpoint, sort_samples, RaySample};
use super::{LightFalloff, RayCounts, ReferenceSettings, RenderSettings, Scene};
use crate::geom::{fibonacci_sphere, stratified_into, uniform_sphere_dirs, Dir3, Ray, Rgb, Rng, Vec3};

#[derive(Clone, Copy, Debug)]
pub(crate) enum Plan {
    /// Stratified jitter along rays, random sphere directions.
    Stochastic,
    /// Midpoint quadrature along rays, fixed spiral directions.
    Reference(ReferenceSettings),
}

/// Per-ray integrator state. One tracer per pixel; not shared across threads.
pub(crate) struct Tracer<'a> {
    scene: &'a Scene,
    settings: &'a RenderSettings,
    plan: Plan,
    reference_dirs: Arc<[Dir3]>,
    pub(crate) counts: RayCounts,
}

// stream tags below the per-light / per-direction indices
const MARCH_STREAM: u64 = 0;
const SHADE_STREAM: u64 = 1;
const DIRECTION_STREAM: u64 = u64::MAX;

impl<'a> Tracer<'a> {
    pub(crate) fn new(scene: &'a Scene, settings: &'a RenderSettings, plan: Plan) -> Self {
        Self::with_directions(scene, settings, plan, None)
    }

    pub(crate) fn with_directions(
        scene: &'a Scene,
        settings: &'a RenderSettings,
        plan: Plan,
        dirs: Option<Arc<[Dir3]>>,
    ) -> Self {
        let reference_dirs = match (plan, dirs) {
            (_, Some(d)) => d,
            (Plan::Reference(r), None) => fibonacci_sphere(r.directions).into(),
            (Plan::Stochastic, None) => Arc::from(Vec::new()),
        };
        Self { scene, settings, plan, reference_dirs, counts: RayCounts::default() }
    }

    fn samples_at(&self, depth: usize) -> usize {
        match self.plan {
            Plan::Stochastic => self.settings.samples_per_object,
            Plan::Reference(r) if depth == 0 => r.samples,
            Plan::Reference(r) => r.secondary_samples,
        }
    }

    fn shadow_samples_at(&self, depth: usize) -> usize {
        match self.plan {
            Plan::Stochastic => self.settings.shadow_samples,
            Plan::Reference(r) if depth == 0 => r.shadow_samples,
            Plan::Reference(r) => r.secondary_samples,
        }
    }

    /// Consecutive merged samples sharing one in-scattering evaluation.
    fn shading_stride(&self, depth: usize) -> usize {
        match self.plan {
            Plan::Stochastic => 1,
            Plan::Reference(r) => {
                let nodes = if depth == 0 { r.shading_nodes } else { r.secondary_shading_nodes };
                self.samples_at(depth).div_ceil(nodes.max(1))
            }
        }
    }

    fn escape(&self, dir: Dir3, depth: usize) -> Rgb {
        match &self.scene.environment {
            Some(env) => env.radiance(dir),
            None if depth == 0 => self.settings.background,
            None => Rgb::BLACK,
        }
    }

    /// Collects samples from every object the ray's box test keeps.
    pub(crate) fn gather_samples(&mut self, ray: &Ray, depth: usize, exclude: Option<usize>, rng: &Rng) -> Vec<RaySample> {
        let n = self.samples_at(depth);
        let march_rng = rng.derive(MARCH_STREAM);
        let mut samples = Vec::new();
        let mut ts = Vec::with_capacity(n);
        let scene = self.scene;
        for (i, obj) in scene.objects.iter().enumerate() {
            if exclude == Some(i) {
                continue;
            }
            let Some(bounds) = obj.intersect(ray) else { continue };
            match self.plan {
                Plan::Stochastic => {
                    let mut r = march_rng.derive(obj.key());
                    if stratified_into(bounds.0, bounds.1, n, &mut r, &mut ts).is_ok() {
                        push_forward_difference(obj, i, ray, &ts, bounds, &mut samples);
                    }
                }
                Plan::Reference(_) => push_midpoint(obj, i, ray, bounds, n, &mut samples),
            }
            self.counts.field_queries += n as u64;
        }
        sort_samples(&mut samples);
        samples
    }

    /// Radiance arriving at the ray origin from along `ray`.
    pub(crate) fn radiance(&mut self, ray: &Ray, depth: usize, exclude: Option<usize>, rng: &Rng) -> Rgb {
        let samples = self.gather_samples(ray, depth, exclude, rng);
        let shade_rng = rng.derive(SHADE_STREAM);
        let stride = self.shading_stride(depth);
        let mut tau = 1.0;
        let mut total = Rgb::BLACK;
        for (g, group) in samples.chunks(stride).enumerate() {
            let mut group_weight = 0.0;
            let mut node: Option<(f64, usize)> = None;
            for (j, s) in group.iter().enumerate() {
                if s.alpha > 0.0 {
                    let w = tau * s.alpha;
                    group_weight += w;
                    if node.is_none_or(|(best, _)| w > best) {
                        node = Some((w, j));
                    }
                    tau *= 1.0 - s.alpha;
                }
            }
            if let Some((_, j)) = node {
                if group_weight > 0.0 {
                    let idx = g * stride + j;
                    let ls = self.in_scattered(&samples[idx], ray.direction, depth, &shade_rng.derive(idx as u64));
                    total += ls * group_weight;
                }
            }
            if tau < self.settings.min_transmittance {
                break;
            }
        }
        total + self.escape(ray.direction, depth) * tau
    }

    /// `L_s` at a sample: direct point lights plus the sphere-gathered term.
    fn in_scattered(&mut self, s: &RaySample, outgoing: Dir3, depth: usize, rng: &Rng) -> Rgb {
        self.direct(s.object_id, s.world_pos, outgoing, depth, rng)
            + self.indirect(s.object_id, s.world_pos, outgoing, depth, rng)
    }

    pub(crate) fn direct(&mut self, object_id: usize, x: Vec3, outgoing: Dir3, depth: usize, rng: &Rng) -> Rgb {
        let scene = self.scene;
        let obj = &scene.objects[object_id];
        let mut sum = Rgb::BLACK;
        for (l, light) in scene.lights.iter().enumerate() {
            let to_light = light.position - x;
            let dist = to_light.length();
            let Some(wl) = to_light.normalized() else { continue };
            let rho = obj.scatter(x, wl, outgoing);
            if rho.is_black() {
                continue;
            }
            let mut radiance = light.radiance;
            if self.settings.light_falloff == LightFalloff::InverseSquare {
                radiance = radiance / (dist * dist);
            }
            if self.settings.mode.shadows() {
                let tau = self.shadow(x, wl, dist, Some(object_id), depth, &mut rng.derive(2 * l as u64));
                radiance *= tau;
            }
            sum += rho * radiance;
        }
        sum
    }

    /// Average over sphere directions of `ρ · L_in`, where `L_in` is a
    /// recursive secondary-ray estimate when bounces remain and the mode allows
    /// indirect light, else (shadowed) environment radiance.
    pub(crate) fn indirect(&mut self, object_id: usize, x: Vec3, outgoing: Dir3, depth: usize, rng: &Rng) -> Rgb {
        let recurse = self.settings.mode.indirect() && depth + 1 < self.settings.max_bounces;
        if !recurse && self.scene.environment.is_none() {
            return Rgb::BLACK;
        }
        let dirs: Arc<[Dir3]> = match self.plan {
            Plan::Stochastic => {
                uniform_sphere_dirs(self.settings.indirect_dirs, &mut rng.derive(DIRECTION_STREAM)).into()
            }
            Plan::Reference(_) => self.reference_dirs.clone(),
        };
        let scene = self.scene;
        let obj = &scene.objects[object_id];
        let eps = self.settings.shadow_epsilon;
        let mut sum = Rgb::BLACK;
        for (k, &wk) in dirs.iter().enumerate() {
            let rho = obj.scatter(x, wk, outgoing);
            if rho.is_black() {
                continue;
            }
            let mut sub = rng.derive(2 * k as u64 + 1);
            let incoming = if recurse {
                self.counts.secondary += 1;
                self.radiance(&Ray::new(x, wk).offset(eps), depth + 1, Some(object_id), &sub)
            } else {
                let env = scene.environment.as_ref().expect("checked above").radiance(wk);
                if self.settings.mode.shadows() {
                    env * self.shadow(x, wk, f64::INFINITY, Some(object_id), depth, &mut sub)
                } else {
                    env
                }
            };
            sum += rho * incoming;
        }
        sum / dirs.len().max(1) as f64
    }

    /// Transmittance from `x` toward `dir` over `max_dist`, skipping `exclude`.
    pub(crate) fn shadow(
        &mut self,
        x: Vec3,
        dir: Dir3,
        max_dist: f64,
        exclude: Option<usize>,
        depth: usize,
        rng: &mut Rng,
    ) -> f64 {
        let eps = self.settings.shadow_epsilon;
        let limit = max_dist - eps;
        if !(limit > 0.0) {
            return 1.0;
        }
        self.counts.shadow += 1;
        let ray = Ray::new(x, dir).offset(eps);
        let n = self.shadow_samples_at(depth);
        let mut factors: Vec<(f64, u64, f64)> = Vec::new();
        let mut ts = Vec::with_capacity(n);
        let scene = self.scene;
        for (i, obj) in scene.objects.iter().enumerate() {
            if exclude == Some(i) {
                continue;
            }
            let Some((a, b)) = obj.intersect(&ray) else { continue };
            let b = b.min(limit);
            if !(a < b) {
                continue;
            }
            let mut tau = 1.0;
            match self.plan {
                Plan::Stochastic => {
                    let mut r = rng.derive(obj.key());
                    if stratified_into(a, b, n, &mut r, &mut ts).is_err() {
                        continue;
                    }
                    for (&t, dt) in ts.iter().zip(interval_widths(&ts, (a, b))) {
                        tau *= 1.0 - alpha(obj.density(ray.at(t)), dt);
                    }
                }
                Plan::Reference(_) => {
                    let dt = (b - a) / n as f64;
                    for k in 0..n {
                        tau *= 1.0 - alpha(obj.density(ray.at(a + (k as f64 + 0.5) * dt)), dt);
                    }
                }
            }
            self.counts.field_queries += n as u64;
            factors.push((a, obj.key(), tau));
        }
        factors.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        factors.iter().fold(1.0, |acc, f| acc * f.2)
    }
}
