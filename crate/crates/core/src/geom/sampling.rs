use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dir3, GeomError, Vec3};

/// Deterministic sample stream.
///
/// Streams are keyed: `derive(i)` depends only on this stream's key and `i`,
/// never on how many values have already been drawn, so parallel callers can
/// split work by index and get schedule-independent results.
#[derive(Clone, Debug)]
pub struct Rng {
    key: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { key: seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Independent child stream for `index`.
    pub fn derive(&self, index: u64) -> Rng {
        Rng::new(splitmix64(self.key ^ splitmix64(index)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_f32(&mut self) -> f32 {
        self.inner.random::<f32>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

/// One jittered draw per equal-width bin of `[t_near, t_far]`, ascending.
pub fn stratified_samples(t_near: f64, t_far: f64, n: usize, rng: &mut Rng) -> Result<Vec<f64>, GeomError> {
    let mut out = Vec::with_capacity(n);
    stratified_into(t_near, t_far, n, rng, &mut out)?;
    Ok(out)
}

pub(crate) fn stratified_into(
    t_near: f64,
    t_far: f64,
    n: usize,
    rng: &mut Rng,
    out: &mut Vec<f64>,
) -> Result<(), GeomError> {
    if !(t_near < t_far) || !t_near.is_finite() || !t_far.is_finite() {
        return Err(GeomError::InvalidInterval { t_near, t_far });
    }
    if n == 0 {
        return Err(GeomError::ZeroCount);
    }
    out.clear();
    let width = (t_far - t_near) / n as f64;
    for k in 0..n {
        let lo = t_near + k as f64 * width;
        let hi = if k + 1 == n { t_far } else { t_near + (k + 1) as f64 * width };
        let t = lo + rng.uniform() * width;
        // rounding can land exactly on the upper edge
        out.push(if t >= hi { lo.max(hi.next_down()) } else { t.max(lo) });
    }
    Ok(())
}

/// Uniformly distributed direction on the unit sphere.
pub fn uniform_sphere_dir(rng: &mut Rng) -> Dir3 {
    let z = 1.0 - 2.0 * rng.uniform();
    let phi = std::f64::consts::TAU * rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Dir3::new_unchecked(Vec3::new(r * phi.cos(), r * phi.sin(), z))
}

pub fn uniform_sphere_dirs(k: usize, rng: &mut Rng) -> Vec<Dir3> {
    (0..k).map(|_| uniform_sphere_dir(rng)).collect()
}

/// Uniform direction within `half_angle` radians of `axis`; `π` or more
/// covers the whole sphere.
pub fn uniform_cone_dir(axis: Dir3, half_angle: f64, rng: &mut Rng) -> Dir3 {
    let cos_max = half_angle.min(std::f64::consts::PI).cos();
    let z = 1.0 - rng.uniform() * (1.0 - cos_max);
    let phi = std::f64::consts::TAU * rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let a = axis.vec();
    let helper = if a.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let u = a.cross(helper).normalized().expect("helper is not parallel to axis").vec();
    let v = a.cross(u);
    Dir3::new_unchecked(u * (r * phi.cos()) + v * (r * phi.sin()) + a * z)
}

/// `k` near-uniform deterministic directions on the golden-angle spiral.
pub fn fibonacci_sphere(k: usize) -> Vec<Dir3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..k)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Dir3::new(Vec3::new(r * phi.cos(), r * phi.sin(), z)).expect("unit spiral point")
        })
        .collect()
}
