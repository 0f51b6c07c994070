use crate::field::ObjectInstance;
use crate::geom::{stratified_into, GeomError, Ray, Rng, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub world_pos: Vec3,
    /// Index into the scene's object list.
    pub object_id: usize,
    /// Content key of the object, used to break ties in `t` deterministically.
    pub object_key: u64,
    pub density: f64,
    pub alpha: f64,
}

/// Samples along one ray, possibly from several objects.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RaySampleSet {
    pub samples: Vec<RaySample>,
}

/// `α = 1 - exp(-σ Δt)`.
pub fn alpha(density: f64, dt: f64) -> f64 {
    -(-density * dt).exp_m1()
}

impl RaySampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Concatenates and sorts by `t` (object key breaks ties), so the result is
    /// independent of the order the sets are given in.
    pub fn merge(sets: impl IntoIterator<Item = RaySampleSet>) -> RaySampleSet {
        let mut samples: Vec<RaySample> = sets.into_iter().flat_map(|s| s.samples).collect();
        sort_samples(&mut samples);
        RaySampleSet { samples }
    }

    /// `Π (1 - α)`.
    pub fn transmittance(&self) -> f64 {
        self.samples.iter().fold(1.0, |tau, s| tau * (1.0 - s.alpha))
    }

    /// Front-to-back compositing weights `α_m Π_{n<m} (1 - α_n)`.
    pub fn weights(&self) -> Vec<f64> {
        let mut tau = 1.0;
        self.samples
            .iter()
            .map(|s| {
                let w = tau * s.alpha;
                tau *= 1.0 - s.alpha;
                w
            })
            .collect()
    }
}

pub(crate) fn sort_samples(samples: &mut [RaySample]) {
    samples.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.object_key.cmp(&b.object_key)));
}

/// Stratified march through one object between `t_bounds` (world units).
///
/// Each sample covers the gap up to the next one; the first also covers the
/// lead-in from `t_near` and the last runs to `t_far`, so the intervals tile
/// the segment exactly.
pub fn march_object(
    obj: &ObjectInstance,
    object_id: usize,
    ray: &Ray,
    t_bounds: (f64, f64),
    m: usize,
    rng: &mut Rng,
) -> Result<RaySampleSet, GeomError> {
    let mut ts = Vec::with_capacity(m);
    stratified_into(t_bounds.0, t_bounds.1, m, rng, &mut ts)?;
    let mut samples = Vec::with_capacity(m);
    push_forward_difference(obj, object_id, ray, &ts, t_bounds, &mut samples);
    Ok(RaySampleSet { samples })
}

/// Width each sample stands for: the forward gap, with the first interval
/// starting at `t_near` and the last ending at `t_far`.
pub fn interval_widths(ts: &[f64], t_bounds: (f64, f64)) -> impl Iterator<Item = f64> + '_ {
    (0..ts.len()).map(move |i| {
        let start = if i == 0 { t_bounds.0 } else { ts[i] };
        ts.get(i + 1).copied().unwrap_or(t_bounds.1) - start
    })
}

pub(crate) fn push_forward_difference(
    obj: &ObjectInstance,
    object_id: usize,
    ray: &Ray,
    ts: &[f64],
    t_bounds: (f64, f64),
    out: &mut Vec<RaySample>,
) {
    for (&t, dt) in ts.iter().zip(interval_widths(ts, t_bounds)) {
        let world_pos = ray.at(t);
        let density = obj.density(world_pos);
        out.push(RaySample {
            t,
            world_pos,
            object_id,
            object_key: obj.key(),
            density,
            alpha: alpha(density, dt),
        });
    }
}

/// Deterministic midpoint rule: `m` equal bins, one sample at each bin centre
/// carrying the full bin width.
pub(crate) fn push_midpoint(
    obj: &ObjectInstance,
    object_id: usize,
    ray: &Ray,
    t_bounds: (f64, f64),
    m: usize,
    out: &mut Vec<RaySample>,
) {
    let dt = (t_bounds.1 - t_bounds.0) / m as f64;
    for k in 0..m {
        let t = t_bounds.0 + (k as f64 + 0.5) * dt;
        let world_pos = ray.at(t);
        let density = obj.density(world_pos);
        out.push(RaySample { t, world_pos, object_id, object_key: obj.key(), density, alpha: alpha(density, dt) });
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::HomogeneousSphere;
    use crate::geom::{Dir3, Rgb, RigidTransform};

    fn sphere(density: f64) -> ObjectInstance {
        ObjectInstance::new(
            Arc::new(HomogeneousSphere::new(1.0, density, Rgb::splat(0.8)).unwrap()),
            RigidTransform::IDENTITY,
        )
    }

    #[test]
    fn beer_lambert_through_diameter() {
        let obj = sphere(5.0);
        let ray = Ray::new(Vec3::new(-3.0, 0.0, 0.0), Dir3::X);
        let bounds = obj.intersect(&ray).unwrap();
        let set = march_object(&obj, 0, &ray, bounds, 192, &mut Rng::new(1)).unwrap();
        let tau = set.transmittance();
        let expect = (-10.0f64).exp();
        assert!((tau / expect - 1.0).abs() < 0.02, "{tau} vs {expect}");
    }

    #[test]
    fn grazing_ray_inside_box_is_transparent() {
        let obj = sphere(5.0);
        let ray = Ray::new(Vec3::new(-3.0, 0.95, 0.95), Dir3::X);
        let bounds = obj.intersect(&ray).unwrap();
        let set = march_object(&obj, 0, &ray, bounds, 64, &mut Rng::new(2)).unwrap();
        assert_eq!(set.len(), 64);
        assert!(set.samples.iter().all(|s| s.alpha == 0.0));
    }

    #[test]
    fn single_sample_covers_whole_segment() {
        let obj = sphere(2.0);
        let ray = Ray::new(Vec3::new(-3.0, 0.0, 0.0), Dir3::X);
        let bounds = obj.intersect(&ray).unwrap();
        let set = march_object(&obj, 0, &ray, bounds, 1, &mut Rng::new(3)).unwrap();
        assert_eq!(set.samples[0].alpha, alpha(2.0, bounds.1 - bounds.0));
    }

    #[test]
    fn interval_widths_tile_the_segment() {
        let ts = [1.2, 1.5, 2.9];
        let w: Vec<f64> = interval_widths(&ts, (1.0, 3.0)).collect();
        assert_eq!(w.len(), 3);
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 1.4).abs() < 1e-12 && (w[2] - 0.1).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weights_partition_unity() {
        let obj = sphere(3.0);
        let ray = Ray::new(Vec3::new(-3.0, 0.2, 0.1), Dir3::X);
        let set = march_object(&obj, 0, &ray, obj.intersect(&ray).unwrap(), 50, &mut Rng::new(4)).unwrap();
        let w = set.weights();
        let total: f64 = w.iter().sum();
        assert!(w.iter().all(|&x| x >= 0.0));
        assert!((total + set.transmittance() - 1.0).abs() < 1e-12);
    }
}
