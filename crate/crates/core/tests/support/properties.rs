//! Property suites, shared by the `properties` test target and the
//! acceptance report. Each suite runs a fixed-seed proptest runner and
//! returns the first counterexample as an error.

use std::sync::Arc;

use osf_core::field::{HomogeneousSphere, LambertianShell, ObjectInstance};
use osf_core::geom::{stratified_samples, Dir3, Mat3, Ray, Rgb, RigidTransform, Rng, Vec3};
use osf_core::io::{psnr, ssim, ImageBuffer};
use osf_core::neural::{Cache, Inputs, Mlp, MlpConfig};
use osf_core::render::{march_object, render_ray, PointLight, RenderMode, RenderSettings, Scene};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub const SUITES: [Suite; 8] = [
    ("compositing weight bounds", compositing_weight_bounds),
    ("object-order bitwise invariance", object_order_invariance),
    ("density view-invariance", density_view_invariance),
    ("scatter fraction range", scatter_fraction_range),
    ("transform round trips", transform_round_trips),
    ("rng determinism", rng_determinism),
    ("stratified bin membership", stratified_bin_membership),
    ("metric symmetry", metric_symmetry),
];

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for {value:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn dir() -> impl Strategy<Value = Dir3> {
    vec3(1.0).prop_filter_map("degenerate direction", |v| if v.length() > 1e-3 { v.normalized() } else { None })
}

fn albedo() -> impl Strategy<Value = Rgb> {
    (0.0..=1.0, 0.0..=1.0, 0.0..=1.0).prop_map(|(r, g, b)| Rgb::new(r, g, b))
}

fn sphere(radius: f64, sigma: f64, albedo: Rgb, at: Vec3) -> ObjectInstance {
    let field = HomogeneousSphere::new(radius, sigma, albedo).expect("valid sphere");
    ObjectInstance::new(Arc::new(field), RigidTransform::translation(at))
}

fn small_mlp(seed: u64) -> Mlp<f64> {
    let cfg = MlpConfig {
        pos_freqs: 3,
        dir_freqs: 2,
        trunk_depth: 3,
        trunk_width: 16,
        skip_layer: Some(2),
        scatter_depth: 1,
        scatter_width: 8,
        ..Default::default()
    };
    Mlp::new(cfg, &mut Rng::new(seed)).expect("valid network")
}

/// Weights of a march through a homogeneous sphere lie in `[0, 1]` and, with
/// the final transmittance, sum to one.
pub fn compositing_weight_bounds() -> Result<(), String> {
    let strategy = (0.01f64..50.0, 0.2f64..2.0, dir(), vec3(0.5), 1usize..64, any::<u64>());
    run(256, strategy, |(sigma, radius, d, aim, m, seed)| {
        let obj = sphere(radius, sigma, Rgb::WHITE, Vec3::ZERO);
        let ray = Ray::new(aim - d.vec() * 5.0, d);
        let Some(span) = obj.intersect(&ray) else { return Ok(()) };
        let set = march_object(&obj, 0, &ray, span, m, &mut Rng::new(seed)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let w = set.weights();
        prop_assert!(w.iter().all(|w| (0.0..=1.0).contains(w)), "weights {w:?}");
        let total: f64 = w.iter().sum::<f64>() + set.transmittance();
        prop_assert!((total - 1.0).abs() < 1e-12, "weights and transmittance sum to {total}");
        Ok(())
    })
}

/// Permuting the scene's object list leaves every radiance bit unchanged.
pub fn object_order_invariance() -> Result<(), String> {
    let object = (0.2f64..0.8, 0.5f64..20.0, albedo(), vec3(1.0));
    let strategy = (prop::collection::vec(object, 2..4), dir(), any::<u64>(), any::<bool>());
    run(48, strategy, |(objs, d, seed, shadows)| {
        let objects: Vec<ObjectInstance> = objs.iter().map(|&(r, s, a, at)| sphere(r, s, a, at)).collect();
        let mut scene = Scene { objects, lights: vec![PointLight::white(Vec3::new(1.0, 4.0, 2.0))], environment: None };
        let mode = if shadows { RenderMode::Full } else { RenderMode::DirectOnly };
        let settings = RenderSettings { mode, samples_per_object: 16, shadow_samples: 8, indirect_dirs: 3, ..Default::default() };
        let ray = Ray::new(d.vec() * -5.0, d);
        let rng = Rng::new(seed);
        let before = render_ray(&scene, &ray, &settings, &rng, 0);
        scene.objects.reverse();
        let after = render_ray(&scene, &ray, &settings, &rng, 0);
        prop_assert_eq!(before.0.map(f64::to_bits), after.0.map(f64::to_bits));
        Ok(())
    })
}

/// The density head never sees a direction: changing both directions leaves
/// every density bit unchanged.
pub fn density_view_invariance() -> Result<(), String> {
    let strategy = (any::<u64>(), vec3(1.2), dir(), dir(), dir(), dir());
    run(128, strategy, |(seed, x, wl1, wo1, wl2, wo2)| {
        let net = small_mlp(seed);
        let cfg = *net.config();
        let mut inputs = Inputs::with_capacity(&cfg, 2);
        inputs.push(&cfg, x, wl1, wo1);
        inputs.push(&cfg, x, wl2, wo2);
        let out = net.forward(&inputs, &mut Cache::default());
        prop_assert_eq!(out.sigma[0].to_bits(), out.sigma[1].to_bits());
        let shell = LambertianShell::new(1.0, 0.2, 10.0, Rgb::WHITE).expect("valid shell");
        let obj = ObjectInstance::new(Arc::new(shell), RigidTransform::translation(Vec3::ZERO));
        prop_assert_eq!(obj.query(x, wl1, wo1).density.to_bits(), obj.query(x, wl2, wo2).density.to_bits());
        Ok(())
    })
}

/// Scatter fractions stay in `[0, 1]`, even for networks with inflated
/// weights.
pub fn scatter_fraction_range() -> Result<(), String> {
    let strategy = (any::<u64>(), 1.0f64..50.0, vec3(1.5), dir(), dir());
    run(128, strategy, |(seed, gain, x, wl, wo)| {
        let mut net = small_mlp(seed);
        net.params_mut().iter_mut().for_each(|p| *p *= gain);
        let cfg = *net.config();
        let mut inputs = Inputs::with_capacity(&cfg, 1);
        inputs.push(&cfg, x, wl, wo);
        let out = net.forward(&inputs, &mut Cache::default());
        prop_assert!(out.rho.iter().all(|r| (0.0..=1.0).contains(r)), "rho {:?}", out.rho);
        prop_assert!(out.sigma.iter().all(|s| *s >= 0.0), "sigma {:?}", out.sigma);
        let shell = LambertianShell::new(1.0, 0.3, 10.0, Rgb::WHITE).expect("valid shell");
        let obj = ObjectInstance::new(Arc::new(shell), RigidTransform::translation(Vec3::ZERO));
        prop_assert!(obj.scatter(x, wl, wo).in_unit_range());
        Ok(())
    })
}

/// World-to-object followed by object-to-world returns the input.
pub fn transform_round_trips() -> Result<(), String> {
    let strategy = (vec3(360.0), vec3(10.0), 0.1f64..10.0, vec3(5.0), dir());
    run(256, strategy, |(rot, t, scale, p, d)| {
        let tf = RigidTransform::new(Mat3::from_rotation_vector_deg(rot), t, scale).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let tol = 1e-9 * (1.0 + p.length() + t.length()) * (1.0 + scale + 1.0 / scale);
        prop_assert!((tf.inverse_point(tf.apply_point(p)) - p).length() < tol);
        prop_assert!((tf.apply_point(tf.inverse_point(p)) - p).length() < tol);
        prop_assert!((tf.inverse().apply_point(p) - tf.inverse_point(p)).length() < tol);
        prop_assert!((tf.inverse_dir(tf.apply_dir(d)).vec() - d.vec()).length() < 1e-12);
        let ray = Ray::new(p, d);
        let back = tf.to_world_frame(&tf.to_object_frame(&ray));
        prop_assert!((back.origin - ray.origin).length() < tol);
        prop_assert!((back.direction.vec() - ray.direction.vec()).length() < 1e-12);
        prop_assert!((tf.rotation().determinant() - 1.0).abs() < 1e-12);
        Ok(())
    })
}

/// Equal seeds and indices give equal streams; different indices differ.
pub fn rng_determinism() -> Result<(), String> {
    let strategy = (any::<u64>(), any::<u64>(), any::<u64>());
    run(256, strategy, |(seed, i, j)| {
        let draw = |r: Rng| {
            let mut r = r;
            (0..8).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(Rng::new(seed).derive(i)), draw(Rng::new(seed).derive(i)));
        if i != j {
            prop_assert_ne!(draw(Rng::new(seed).derive(i)), draw(Rng::new(seed).derive(j)));
        }
        let mut a = Rng::new(seed);
        let u = a.uniform();
        prop_assert!((0.0..1.0).contains(&u));
        Ok(())
    })
}

/// Sample `k` of `n` lies in the `k`-th of `n` equal bins of the segment.
pub fn stratified_bin_membership() -> Result<(), String> {
    let strategy = (-10.0f64..10.0, 1e-3f64..20.0, 1usize..256, any::<u64>());
    run(256, strategy, |(a, len, n, seed)| {
        let b = a + len;
        let ts = stratified_samples(a, b, n, &mut Rng::new(seed)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(ts.len(), n);
        let width = (b - a) / n as f64;
        for (k, t) in ts.iter().enumerate() {
            let (lo, hi) = (a + k as f64 * width, a + (k + 1) as f64 * width);
            prop_assert!(*t >= lo - 1e-12 && *t <= hi + 1e-12, "sample {k} = {t} outside [{lo}, {hi}]");
        }
        prop_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        Ok(())
    })
}

/// PSNR and SSIM are symmetric, and perfect on identical images.
pub fn metric_symmetry() -> Result<(), String> {
    let image = prop::collection::vec((0.0f32..1.5, 0.0f32..1.5, 0.0f32..1.5), 16 * 16)
        .prop_map(|px| ImageBuffer::from_pixels(16, 16, px.into_iter().map(|(r, g, b)| [r, g, b]).collect()).expect("16x16"));
    run(64, (image.clone(), image), |(a, b)| {
        let m = |r: Result<f64, osf_core::io::IoError>| r.map_err(|e| TestCaseError::fail(e.to_string()));
        prop_assert_eq!(m(psnr(&a, &b))?.to_bits(), m(psnr(&b, &a))?.to_bits());
        prop_assert!((m(ssim(&a, &b))? - m(ssim(&b, &a))?).abs() < 1e-12);
        prop_assert_eq!(m(psnr(&a, &a))?, f64::INFINITY);
        prop_assert!((m(ssim(&a, &a))? - 1.0).abs() < 1e-12);
        Ok(())
    })
}
