use std::path::Path;

use osf_core::io::{psnr, read_image, ssim, write_pfm, DatasetManifest, ImageBuffer, Split};
use osf_core::neural::{render_frame, Checkpoint, PassOptions};
use serde_json::{json, Value};

use super::Context;
use crate::args::EvalArgs;
use crate::error::{CliError, Result};

pub fn eval(ctx: &Context, a: &EvalArgs) -> Result<()> {
    let report = match (&a.render, &a.reference, &a.checkpoint, &a.dataset) {
        (Some(render), Some(reference), None, None) => {
            let (p, s) = score(&read_image(render)?, &read_image(reference)?)?;
            json!({ "psnr": number(p), "ssim": number(s) })
        }
        (None, None, Some(checkpoint), Some(dataset)) => eval_checkpoint(ctx, a, checkpoint, dataset)?,
        _ => {
            return Err(CliError::Usage(
                "give either --render and --reference, or --checkpoint and --dataset".into(),
            ))
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("metrics serialise");
    std::fs::write(&a.metrics, text + "\n").map_err(|e| CliError::Data(format!("{}: {e}", a.metrics.display())))
}

/// Per-frame and mean PSNR/SSIM of the checkpoint's renders against a split.
fn eval_checkpoint(ctx: &Context, a: &EvalArgs, checkpoint: &Path, dataset: &Path) -> Result<Value> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let manifest = DatasetManifest::load(dataset)?;
    if manifest.object_bounds()? != ckpt.bounds {
        return Err(CliError::Data(format!("{} was trained on a different object box", checkpoint.display())));
    }
    let split = if a.train_split { Split::Train } else { Split::Test };
    let opts = PassOptions {
        coarse_samples: a.coarse_samples,
        fine_samples: a.fine_samples,
        chunk_rays: 64,
        background: manifest.background,
    };
    if opts.coarse_samples == 0 || opts.fine_samples == 0 {
        return Err(CliError::Usage("sample counts must be at least 1".into()));
    }
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    let mut frames = Vec::new();
    let (mut psnr_sum, mut ssim_sum) = (0.0, 0.0);
    for (i, frame) in manifest.frames(split).enumerate() {
        let target = manifest.load_image(dataset, frame)?;
        let seed = osf_core::geom::Rng::new(ctx.seed).derive(i as u64).key();
        let img = render_frame(&ckpt.coarse, &ckpt.fine, &ckpt.bounds, &manifest, frame, &opts, seed)?;
        if let Some(dir) = &a.out_dir {
            let name = frame.image.file_name().expect("frame paths name a file");
            write_pfm(&dir.join(name), &img)?;
        }
        let (p, s) = score(&img, &target)?;
        ctx.progress(|| format!("{}: psnr {p:.2} dB, ssim {s:.4}", frame.image.display()));
        psnr_sum += p;
        ssim_sum += s;
        frames.push(json!({ "image": frame.image, "psnr": number(p), "ssim": number(s) }));
    }
    if frames.is_empty() {
        return Err(CliError::Data(format!("{}: the {split:?} split has no frames", dataset.display())));
    }
    let n = frames.len() as f64;
    Ok(json!({ "psnr": number(psnr_sum / n), "ssim": number(ssim_sum / n), "frames": frames }))
}

fn score(img: &ImageBuffer, reference: &ImageBuffer) -> Result<(f64, f64)> {
    Ok((psnr(img, reference)?, ssim(img, reference)?))
}

/// JSON has no infinities; identical images score the string `"inf"`.
fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!(v.to_string())
    }
}
