//! Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p osf-cli --test acceptance -- 1 3`.

#[path = "../../core/tests/support/properties.rs"]
mod properties;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use osf_core::geom::{Rgb, Rng, Vec3};
use osf_core::io::{load_scene, psnr, read_pfm, ssim, write_pfm, ImageBuffer, LoadedScene};
use osf_core::neural::gradcheck::toy_gradient_check;
use osf_core::render::{
    reference_ray, render_image, render_reference, render_ray, ReferenceSettings, RenderMode, RenderSettings, Scene,
};
use serde_json::Value;

/// Held-out PSNR (dB) the lighting-conditioned model must exceed. The first
/// successful desk-scale run scored 27.04 dB; the margin absorbs rounding
/// differences from CPU-specific GEMM kernels. See the README.
const HELD_OUT_PSNR_THRESHOLD: f64 = 26.5;

type Check = fn(&Path) -> Result<String, String>;

const CRITERIA: [(u32, &str, Duration, Check); 8] = [
    (1, "Beer-Lambert transmittance", Duration::from_secs(10), beer_lambert),
    (2, "oracle equivalence", Duration::from_secs(300), oracle_equivalence),
    (3, "gradient correctness", Duration::from_secs(60), gradient_correctness),
    (4, "desk-scale self-consistency", Duration::from_secs(7200), self_consistency),
    (5, "ablation-mode orderings", Duration::from_secs(300), ablation_orderings),
    (6, "environment-map tint", Duration::from_secs(120), environment_tint),
    (7, "property suites", Duration::from_secs(120), property_suites),
    (8, "seed determinism", Duration::MAX, seed_determinism),
];

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let scratch = tempfile::tempdir().expect("scratch directory");
    let mut failures = 0;
    for (n, name, limit, check) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let dir = scratch.path().join(format!("c{n}"));
        std::fs::create_dir_all(&dir).expect("criterion directory");
        let start = Instant::now();
        let result = check(&dir);
        let took = start.elapsed();
        let (pass, mut detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let in_time = took <= limit;
        if !in_time {
            detail.push_str(&format!("; over the {:.0} s limit", limit.as_secs_f64()));
        }
        let verdict = if pass && in_time { "PASS" } else { "FAIL" };
        failures += usize::from(verdict == "FAIL");
        println!("criterion {n} {verdict}: {name}: {detail} [{:.1} s]", took.as_secs_f64());
    }
    // exit skips destructors
    drop(scratch);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn load(rel: &str) -> LoadedScene {
    let path = workspace_file(rel);
    load_scene(&path).and_then(|d| d.build(path.parent().unwrap())).expect("bundled scene loads")
}

fn osf(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_osf")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("osf {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn check(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// A black sphere in front of a white background: the camera ray's radiance
/// is the transmittance through the diameter. Early ray termination is off,
/// since exp(-10) lies below its default cutoff.
fn beer_lambert(_: &Path) -> Result<String, String> {
    let scene = Scene {
        objects: vec![osf_core::field::ObjectInstance::new(
            std::sync::Arc::new(osf_core::field::HomogeneousSphere::new(1.0, 5.0, Rgb::BLACK).unwrap()),
            osf_core::geom::RigidTransform::translation(Vec3::ZERO),
        )],
        ..Default::default()
    };
    let settings = RenderSettings {
        samples_per_object: 192,
        background: Rgb::WHITE,
        mode: RenderMode::DirectOnly,
        min_transmittance: 0.0,
        ..Default::default()
    };
    let ray = osf_core::geom::Ray::new(Vec3::new(0.0, 0.0, 5.0), Vec3::new(0.0, 0.0, -1.0).normalized().unwrap());
    let expected = (-10.0f64).exp();
    let mc = render_ray(&scene, &ray, &settings, &Rng::new(0), 0).g();
    let oracle = reference_ray(&scene, &ray, &settings, &ReferenceSettings::exhaustive(4096, 1)).g();
    let (e_mc, e_or) = ((mc / expected - 1.0).abs(), (oracle / expected - 1.0).abs());
    check(
        e_mc < 0.02 && e_or < 0.001,
        format!("exp(-10) = {expected:.6e}; Monte Carlo {mc:.6e} (rel err {e_mc:.2e} < 2e-2), oracle {oracle:.6e} (rel err {e_or:.2e} < 1e-3)"),
    )
}

fn full_settings(mode: RenderMode, background: Rgb) -> RenderSettings {
    RenderSettings { samples_per_object: 192, shadow_samples: 192, indirect_dirs: 20, max_bounces: 2, mode, background, ..Default::default() }
}

fn oracle_equivalence(_: &Path) -> Result<String, String> {
    let s = load("scenes/three_objects.json");
    let settings = full_settings(RenderMode::Full, s.background);
    let (mc, _) = render_image(&s.scene, &s.camera, &settings, 0).map_err(|e| e.to_string())?;
    let reference = ReferenceSettings { directions: 128, ..Default::default() };
    let oracle = render_reference(&s.scene, &s.camera, &settings, &reference).map_err(|e| e.to_string())?;
    let (p, q) = (psnr(&mc, &oracle).unwrap(), ssim(&mc, &oracle).unwrap());
    check(p > 30.0 && q > 0.95, format!("64x64 full mode, M=192 K=20 B=2: PSNR {p:.2} dB (> 30), SSIM {q:.4} (> 0.95)"))
}

fn gradient_correctness(_: &Path) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for seed in 0..3 {
        let r = toy_gradient_check(seed).map_err(|e| e.to_string())?;
        worst = worst.max(r.max_relative_error);
        notes.push(format!("seed {seed}: {:.1e} over {} params, {} kinks skipped", r.max_relative_error, r.params_checked, r.kinks));
    }
    check(worst < 1e-3, format!("max relative error {worst:.2e} (< 1e-3); {}", notes.join(", ")))
}

fn metrics(path: &Path) -> Result<f64, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v["psnr"].as_f64().ok_or_else(|| format!("{}: no numeric psnr", path.display()))
}

fn self_consistency(dir: &Path) -> Result<String, String> {
    let s = |p: &Path| p.to_str().expect("utf-8 scratch path").to_owned();
    let data = s(&dir.join("dataset"));
    let config = s(&workspace_file("scenes/shell_train.json"));
    let scene = s(&workspace_file("scenes/shell.json"));
    // views anywhere on the sphere, lights within 60° of the scene light: with
    // 100 frames a whole-sphere light leaves held-out lighting too sparsely
    // covered to interpolate
    osf(&[
        "make-dataset", "--scene", &scene, "--out", &data, "--frames", "100", "--test-frames", "10", "--resolution", "64x64",
        "--pose-jitter", "180", "--light-jitter", "60",
    ])?;
    let mut scores = Vec::new();
    for (name, extra) in [("lit", None), ("blind", Some("--blind-light-dir"))] {
        let ckpt = s(&dir.join(format!("{name}.bin")));
        let out = s(&dir.join(format!("{name}.json")));
        let mut args = vec!["train", "--config", &config, "--dataset", &data, "--out-checkpoint", &ckpt, "--iters", "20000"];
        args.extend(extra);
        osf(&args)?;
        osf(&["eval", "--checkpoint", &ckpt, "--dataset", &data, "--metrics", &out, "--coarse-samples", "32", "--fine-samples", "32"])?;
        scores.push(metrics(Path::new(&out))?);
    }
    let (lit, blind) = (scores[0], scores[1]);
    check(
        lit > HELD_OUT_PSNR_THRESHOLD && blind < lit,
        format!("held-out PSNR {lit:.2} dB (threshold {HELD_OUT_PSNR_THRESHOLD} dB), lighting-blind {blind:.2} dB (must be lower)"),
    )
}

/// Pixels whose camera ray first meets the ground shell at a point from
/// which the segment to the light passes well inside the occluding sphere.
fn umbra(s: &LoadedScene) -> Vec<usize> {
    let spheres = [(Vec3::new(0.0, -1.2, 0.0), 1.2), (Vec3::new(0.0, 0.55, 0.0), 0.35), (Vec3::new(0.8, 0.25, 0.5), 0.35)];
    let light = s.scene.lights[0].position;
    let hit = |o: Vec3, d: Vec3, c: Vec3, r: f64| {
        let oc = o - c;
        let b = oc.dot(d);
        let disc = b * b - (oc.length_squared() - r * r);
        (disc >= 0.0).then(|| -b - disc.sqrt()).filter(|t| *t > 0.0)
    };
    let (w, h) = (s.camera.width, s.camera.height);
    (0..w * h)
        .filter(|&i| {
            let ray = s.camera.pixel_center_ray(i % w, i / w);
            let d = ray.direction.vec();
            let first = spheres
                .iter()
                .enumerate()
                .filter_map(|(k, &(c, r))| hit(ray.origin, d, c, r).map(|t| (t, k)))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let Some((t, 0)) = first else { return false };
            let p = ray.at(t);
            let (c, r) = spheres[1];
            let seg = light - p;
            let u = ((c - p).dot(seg) / seg.length_squared()).clamp(0.0, 1.0);
            (p + seg * u - c).length() < 0.7 * r
        })
        .collect()
}

fn mean_luminance(img: &ImageBuffer, pixels: &[usize]) -> f64 {
    let w = img.width();
    pixels.iter().map(|&i| img.get(i % w, i / w).luminance()).sum::<f64>() / pixels.len() as f64
}

fn ablation_orderings(_: &Path) -> Result<String, String> {
    let s = load("scenes/three_objects.json");
    let render = |mode| render_image(&s.scene, &s.camera, &full_settings(mode, s.background), 0).map(|r| r.0);
    let direct = render(RenderMode::DirectOnly).map_err(|e| e.to_string())?;
    let shadows = render(RenderMode::DirectShadows).map_err(|e| e.to_string())?;
    let full = render(RenderMode::Full).map_err(|e| e.to_string())?;
    let pairs = |a: &ImageBuffer, b: &ImageBuffer| {
        a.pixels().iter().zip(b.pixels()).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (*x, *y))).collect::<Vec<_>>()
    };
    let shadow_violations = pairs(&shadows, &direct).iter().filter(|(s, d)| s > d).count();
    let full_violations = pairs(&full, &shadows).iter().filter(|(f, s)| f < s).count();
    let region = umbra(&s);
    if region.len() < 10 {
        return Err(format!("umbra covers only {} pixels", region.len()));
    }
    let (ld, ls) = (mean_luminance(&direct, &region), mean_luminance(&shadows, &region));
    check(
        shadow_violations == 0 && full_violations == 0 && ls <= 0.5 * ld,
        format!(
            "direct_shadows > direct_only in {shadow_violations} values, full < direct_shadows in {full_violations}; \
             umbra ({} px) luminance {ls:.4} vs {ld:.4} ({:.0}% darker, need >= 50%)",
            region.len(),
            100.0 * (1.0 - ls / ld)
        ),
    )
}

fn green_red_ratio(img: &ImageBuffer) -> f64 {
    let m = img.mean();
    m.g() / m.r()
}

fn environment_tint(dir: &Path) -> Result<String, String> {
    let s = |p: &Path| p.to_str().expect("utf-8 scratch path").to_owned();
    let env = dir.join("green.pfm");
    write_pfm(&env, &ImageBuffer::filled(8, 4, Rgb::new(0.0, 0.5, 0.0))).map_err(|e| e.to_string())?;
    let scene = s(&workspace_file("scenes/three_objects.json"));
    let (plain, tinted) = (dir.join("plain"), dir.join("tinted"));
    // environment light at the last bounce costs about M²K² per pixel; halve
    // both to stay inside the time budget while keeping full mode and B = 2
    let quality = ["--samples", "96", "--indirect-k", "10"];
    osf(&[&["render", "--scene", &scene, "--out", &s(&plain)][..], &quality].concat())?;
    osf(&[&["render", "--scene", &scene, "--out", &s(&tinted), "--env-map", &s(&env)][..], &quality].concat())?;
    let read = |p: &Path| read_pfm(&p.with_extension("pfm")).map_err(|e| e.to_string());
    let (a, b) = (green_red_ratio(&read(&plain)?), green_red_ratio(&read(&tinted)?));
    check(b > a, format!("mean green/red ratio {a:.4} without, {b:.4} with a constant green map (margin {:.4})", b - a))
}

fn property_suites(_: &Path) -> Result<String, String> {
    let failed: Vec<String> =
        properties::SUITES.iter().filter_map(|(name, suite)| suite().err().map(|e| format!("{name}: {e}"))).collect();
    check(
        failed.is_empty(),
        if failed.is_empty() { format!("{} suites green", properties::SUITES.len()) } else { failed.join("; ") },
    )
}

fn seed_determinism(dir: &Path) -> Result<String, String> {
    let s = |p: &Path| p.to_str().expect("utf-8 scratch path").to_owned();
    let scene = s(&workspace_file("scenes/three_objects.json"));
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "1", "2"].into_iter().enumerate() {
        let out = dir.join(format!("run{i}"));
        osf(&["render", "--scene", &scene, "--out", &s(&out), "--seed", "7", "--threads", threads, "--samples", "48", "--indirect-k", "4"])?;
        outputs.push(std::fs::read(out.with_extension("pfm")).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1] && outputs[0] == outputs[2],
        format!(
            "two single-thread runs {}, two-thread run {}",
            if outputs[0] == outputs[1] { "byte-identical" } else { "differ" },
            if outputs[0] == outputs[2] { "byte-identical too" } else { "differs" }
        ),
    )
}
