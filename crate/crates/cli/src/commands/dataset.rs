use osf_core::field::ObjectInstance;
use osf_core::geom::{uniform_cone_dir, Dir3, Rng, Vec3};
use osf_core::io::{
    frame_file_name, load_scene, write_pfm, DatasetFrame, DatasetManifest, DatasetObject, FieldSpec, Split,
};
use osf_core::render::{render_image, render_reference, Camera, ReferenceSettings, RenderMode, RenderSettings};

use super::{base_dir, Context};
use crate::args::MakeDatasetArgs;
use crate::error::{CliError, Result};

/// Renders `frames + test_frames` views of the scene's only object. Frame `i`
/// draws its camera and light from `Rng::new(seed).derive(i)`: the camera
/// stays at the scene camera's distance from the object's centre and the
/// light at the scene light's, each in a cone around its original direction.
///
/// Frames are rendered in direct-only mode: with one object and no
/// environment map nothing else contributes, and shadow rays that would skip
/// the only object anyway are not traced.
pub fn make_dataset(ctx: &Context, a: &MakeDatasetArgs) -> Result<()> {
    if a.frames + a.test_frames == 0 {
        return Err(CliError::Usage("need at least one frame".into()));
    }
    for (name, v) in [("--pose-jitter", a.pose_jitter), ("--light-jitter", a.light_jitter)] {
        if !(0.0..=180.0).contains(&v) {
            return Err(CliError::Usage(format!("{name} must lie in [0, 180] degrees, got {v}")));
        }
    }
    let desc = load_scene(&a.scene)?;
    if desc.objects.len() != 1 {
        return Err(CliError::Data(format!(
            "{}: datasets capture one object at a time, the scene has {}",
            a.scene.display(),
            desc.objects.len()
        )));
    }
    if desc.lights.len() != 1 {
        return Err(CliError::Data(format!(
            "{}: datasets need exactly one point light, the scene has {}",
            a.scene.display(),
            desc.lights.len()
        )));
    }
    if desc.environment.is_some() {
        return Err(CliError::Data(format!(
            "{}: training frames are lit by the point light alone; remove the environment map",
            a.scene.display()
        )));
    }
    let loaded = desc.build(base_dir(&a.scene))?;
    let object = &loaded.scene.objects[0];
    let bounds = centered_dims(object)?;
    let center = object.transform().translation_part();
    let light = desc.lights[0];
    let (cam_dist, cam_axis) = polar(loaded.camera.position - center, "camera")?;
    let (light_dist, light_axis) = polar(light.position - center, "light")?;
    let (width, height) = a.resolution.unwrap_or((loaded.camera.width, loaded.camera.height));

    let settings = RenderSettings {
        mode: RenderMode::DirectOnly,
        samples_per_object: a.samples,
        shadow_samples: a.samples,
        background: loaded.background,
        ..Default::default()
    };
    let reference = ReferenceSettings {
        samples: a.oracle_samples,
        shadow_samples: a.oracle_samples,
        ..Default::default()
    };
    let mut manifest = DatasetManifest {
        width,
        height,
        vertical_fov_deg: loaded.camera.vertical_fov_deg,
        background: loaded.background,
        object: DatasetObject {
            transform: desc.objects[0].transform.clone(),
            bounds,
            source: match &desc.objects[0].field {
                FieldSpec::Neural { .. } => None,
                spec => Some(spec.clone()),
            },
        },
        frames: Vec::new(),
    };
    std::fs::create_dir_all(a.out.join("frames")).map_err(|e| CliError::Data(format!("{}: {e}", a.out.display())))?;

    let root = Rng::new(ctx.seed);
    let total = a.frames + a.test_frames;
    for i in 0..total {
        let mut rng = root.derive(i as u64);
        let view = uniform_cone_dir(cam_axis, a.pose_jitter.to_radians(), &mut rng);
        let light_dir = uniform_cone_dir(light_axis, a.light_jitter.to_radians(), &mut rng);
        let camera = Camera {
            position: center + view.vec() * cam_dist,
            look_at: center,
            up: up_for(view, loaded.camera.up),
            vertical_fov_deg: loaded.camera.vertical_fov_deg,
            width,
            height,
        };
        let mut scene = loaded.scene.clone();
        scene.lights[0].position = center + light_dir.vec() * light_dist;
        let img = if a.monte_carlo {
            render_image(&scene, &camera, &settings, root.derive(i as u64).derive(1).key())?.0
        } else {
            render_reference(&scene, &camera, &settings, &reference)?
        };
        let image = frame_file_name(i);
        write_pfm(&a.out.join(&image), &img)?;
        manifest.frames.push(DatasetFrame {
            image,
            camera_to_world: camera.camera_to_world(),
            light_position: scene.lights[0].position,
            light_radiance: scene.lights[0].radiance,
            split: if i < a.frames { Split::Train } else { Split::Test },
        });
        ctx.progress(|| format!("frame {}/{total}", i + 1));
    }
    manifest.save(&a.out)?;
    Ok(())
}

/// Full side lengths of the object's canonical box, which must be centred.
fn centered_dims(object: &ObjectInstance) -> Result<Vec3> {
    let b = object.canonical_bounds();
    let mid = (b.min() + b.max()) * 0.5;
    if mid.length() > 1e-9 * (b.max() - b.min()).length() {
        return Err(CliError::Data("the object's canonical box must be centred on its origin".into()));
    }
    Ok(b.max() - b.min())
}

fn polar(offset: Vec3, what: &str) -> Result<(f64, Dir3)> {
    let dir = offset
        .normalized()
        .ok_or_else(|| CliError::Data(format!("the {what} sits at the object's centre; no direction to jitter around")))?;
    Ok((offset.length(), dir))
}

/// `preferred` unless it is nearly parallel to the view direction.
fn up_for(view: Dir3, preferred: Vec3) -> Vec3 {
    let candidates = [preferred, Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0)];
    candidates
        .into_iter()
        .find(|u| view.vec().cross(*u).length() > 1e-3 * u.length())
        .expect("no vector is parallel to all three axes")
}
