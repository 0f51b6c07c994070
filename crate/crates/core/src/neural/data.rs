use std::path::Path;

use super::{render_rays, Mlp, NeuralError, PassOptions, TrainSample};
use crate::geom::{ray_box_intersect, Aabb, Rgb, Rng};
use crate::io::{DatasetFrame, DatasetManifest, ImageBuffer, Split};

/// One sample per pixel of `frame`, moved into the object's canonical frame.
/// Without an image the targets are black.
pub fn frame_samples(
    manifest: &DatasetManifest,
    frame: &DatasetFrame,
    image: Option<&ImageBuffer>,
) -> Result<Vec<TrainSample>, NeuralError> {
    let io = |e: crate::io::IoError| NeuralError::Io(e.to_string());
    let cam = manifest.camera(frame).map_err(io)?;
    let to_obj = manifest.object_transform().map_err(io)?;
    let light_pos = to_obj.inverse_point(frame.light_position);
    let mut out = Vec::with_capacity(cam.width * cam.height);
    for y in 0..cam.height {
        for x in 0..cam.width {
            out.push(TrainSample {
                ray: to_obj.to_object_frame(&cam.pixel_center_ray(x, y)),
                light_pos,
                light_radiance: frame.light_radiance,
                target: image.map_or(Rgb::BLACK, |img| img.get(x, y).clamp01()),
            });
        }
    }
    Ok(out)
}

/// Every pixel of every frame in `split`. With `hits_only`, rays that miss the
/// object's box are dropped: their render is the background whatever the
/// weights, so they carry no gradient.
pub fn load_split(dir: &Path, manifest: &DatasetManifest, split: Split, hits_only: bool) -> Result<Vec<TrainSample>, NeuralError> {
    let bounds = manifest.object_bounds().map_err(|e| NeuralError::Io(e.to_string()))?;
    let mut all = Vec::new();
    for frame in manifest.frames(split) {
        let img = manifest.load_image(dir, frame).map_err(|e| NeuralError::Io(e.to_string()))?;
        let samples = frame_samples(manifest, frame, Some(&img))?;
        all.extend(samples.into_iter().filter(|s| !hits_only || ray_box_intersect(&s.ray, &bounds).is_some()));
    }
    Ok(all)
}

/// Renders `frame` with a coarse/fine pair, fine colours per pixel. Rays that
/// miss the box show the manifest background.
pub fn render_frame(
    coarse: &Mlp<f32>,
    fine: &Mlp<f32>,
    bounds: &Aabb,
    manifest: &DatasetManifest,
    frame: &DatasetFrame,
    opts: &PassOptions,
    seed: u64,
) -> Result<ImageBuffer, NeuralError> {
    let samples = frame_samples(manifest, frame, None)?;
    let colors = render_rays(coarse, fine, &samples, bounds, opts, &Rng::new(seed));
    let w = manifest.width;
    Ok(ImageBuffer::from_fn(w, manifest.height, |x, y| Rgb(colors[y * w + x].1)))
}
