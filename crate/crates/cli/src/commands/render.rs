use osf_core::io::{load_scene, read_image, write_pfm, write_png};
use osf_core::render::{render_image, render_reference, EnvironmentMap, ReferenceSettings, RenderSettings};

use super::{base_dir, Context};
use crate::args::RenderArgs;
use crate::error::{CliError, Result};

pub fn render(ctx: &Context, a: &RenderArgs) -> Result<()> {
    let desc = load_scene(&a.scene)?;
    let mut loaded = desc.build(base_dir(&a.scene))?;
    if let Some(path) = &a.env_map {
        let img = read_image(path)?;
        loaded.scene.environment = Some(EnvironmentMap::from_image(&img, a.env_scale).map_err(CliError::Data)?);
    }
    let settings = RenderSettings {
        samples_per_object: a.samples,
        shadow_samples: a.shadow_samples.unwrap_or(a.samples),
        indirect_dirs: a.indirect_k,
        max_bounces: a.bounces,
        mode: a.mode,
        background: loaded.background,
        pixel_samples: a.pixel_samples,
        ..Default::default()
    };
    settings.validate()?;
    let start = std::time::Instant::now();
    let img = if a.reference {
        let reference = ReferenceSettings {
            samples: a.oracle_samples,
            shadow_samples: a.oracle_samples,
            directions: a.oracle_directions,
            shading_nodes: a.shading_nodes,
            ..Default::default()
        };
        render_reference(&loaded.scene, &loaded.camera, &settings, &reference)?
    } else {
        let (img, stats) = render_image(&loaded.scene, &loaded.camera, &settings, ctx.seed)?;
        ctx.progress(|| {
            let t = stats.totals;
            format!(
                "rays: {} primary, {} shadow, {} secondary; {} field queries",
                t.primary, t.shadow, t.secondary, t.field_queries
            )
        });
        img
    };
    ctx.progress(|| format!("rendered {}x{} in {:.2?}", img.width(), img.height(), start.elapsed()));
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    write_pfm(&a.out.with_extension("pfm"), &img)?;
    write_png(&a.out.with_extension("png"), &img)?;
    Ok(())
}
