use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use osf_core::render::RenderMode;

#[derive(Debug, Parser)]
#[command(name = "osf", version, about = "Render, train and evaluate object-centric scattering fields")]
pub struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to one per core. Never changes the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Progress and statistics on standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    /// JSON object of flag defaults, keyed by long flag name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a multi-view, multi-light training set of a single object.
    MakeDataset(MakeDatasetArgs),
    /// Fit a coarse/fine network pair to a dataset.
    Train(TrainArgs),
    /// Render a scene description to PFM and PNG.
    Render(RenderArgs),
    /// Image metrics, or held-out metrics of a checkpoint on a dataset.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct MakeDatasetArgs {
    /// Scene with exactly one object and one point light.
    #[arg(long)]
    pub scene: PathBuf,
    /// Output directory for `manifest.json` and `frames/`.
    #[arg(long)]
    pub out: PathBuf,
    /// Training frames.
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    /// Held-out frames, appended after the training frames.
    #[arg(long, default_value_t = 0)]
    pub test_frames: usize,
    /// `WxH`; defaults to the scene camera's resolution.
    #[arg(long, value_parser = parse_resolution)]
    pub resolution: Option<(usize, usize)>,
    /// Half-angle in degrees of the cone of viewpoints around the scene
    /// camera's direction from the object; 180 covers the whole sphere.
    #[arg(long, default_value_t = 180.0)]
    pub pose_jitter: f64,
    /// Half-angle in degrees of the cone of light positions around the scene
    /// light's direction from the object.
    #[arg(long, default_value_t = 180.0)]
    pub light_jitter: f64,
    /// Render frames with the deterministic reference renderer (the default).
    #[arg(long, conflicts_with = "monte_carlo")]
    pub oracle: bool,
    /// Render frames with the Monte Carlo renderer instead.
    #[arg(long)]
    pub monte_carlo: bool,
    /// Reference samples per object along each ray.
    #[arg(long, default_value_t = 4096)]
    pub oracle_samples: usize,
    /// Monte Carlo samples per object along each ray.
    #[arg(long, default_value_t = 192)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    /// Total iterations, counting those already in a resumed checkpoint.
    #[arg(long)]
    pub iters: Option<u64>,
    /// Continue from a checkpoint saved with optimiser state.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Loss curve CSV; defaults to the checkpoint path with `.loss.csv`.
    #[arg(long)]
    pub loss_csv: Option<PathBuf>,
    /// Save a checkpoint every N iterations (0: only at the end).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: u64,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_rays: Option<usize>,
    #[arg(long)]
    pub coarse_samples: Option<usize>,
    #[arg(long)]
    pub fine_samples: Option<usize>,
    /// Rays per parallel work item; changes speed, never results.
    #[arg(long)]
    pub chunk_rays: Option<usize>,
    #[arg(long)]
    pub pos_freqs: Option<usize>,
    #[arg(long)]
    pub dir_freqs: Option<usize>,
    #[arg(long)]
    pub trunk_depth: Option<usize>,
    #[arg(long)]
    pub trunk_width: Option<usize>,
    /// Trunk layer receiving the encoded position again (0: none). The
    /// default skip is dropped for trunks too shallow to hold it.
    #[arg(long)]
    pub skip_layer: Option<usize>,
    #[arg(long)]
    pub scatter_depth: Option<usize>,
    #[arg(long)]
    pub scatter_width: Option<usize>,
    #[arg(long)]
    pub sigmoid_delta: Option<f64>,
    /// Zero the light-direction input (lighting-blind ablation).
    #[arg(long)]
    pub blind_light_dir: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Output path; both `.pfm` and `.png` are written next to each other.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "full", value_parser = parse_mode)]
    pub mode: RenderMode,
    /// Samples per object along camera and secondary rays.
    #[arg(long, default_value_t = 192)]
    pub samples: usize,
    /// Samples per occluder along shadow rays; defaults to `--samples`.
    #[arg(long)]
    pub shadow_samples: Option<usize>,
    /// Sphere directions per indirect estimate.
    #[arg(long, default_value_t = 20)]
    pub indirect_k: usize,
    /// Path depth including the camera ray.
    #[arg(long, default_value_t = 2)]
    pub bounces: usize,
    /// Equirectangular PFM or PNG environment map; overrides the scene's.
    #[arg(long)]
    pub env_map: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub env_scale: f64,
    /// Rays per pixel, jittered when above one.
    #[arg(long, default_value_t = 1)]
    pub pixel_samples: usize,
    /// Use the deterministic reference renderer.
    #[arg(long)]
    pub reference: bool,
    #[arg(long, default_value_t = 4096)]
    pub oracle_samples: usize,
    #[arg(long, default_value_t = 512)]
    pub oracle_directions: usize,
    /// In-scattering evaluations per object span on reference camera rays.
    #[arg(long, default_value_t = 256)]
    pub shading_nodes: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Rendered image to score.
    #[arg(long, requires = "reference", conflicts_with_all = ["checkpoint", "dataset"])]
    pub render: Option<PathBuf>,
    /// Ground-truth image.
    #[arg(long, requires = "render")]
    pub reference: Option<PathBuf>,
    /// Checkpoint to score on a dataset's held-out frames.
    #[arg(long, requires = "dataset")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    pub dataset: Option<PathBuf>,
    /// Score the training frames instead of the held-out ones.
    #[arg(long)]
    pub train_split: bool,
    /// Where to write the checkpoint's renders of the scored frames.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub coarse_samples: usize,
    #[arg(long, default_value_t = 128)]
    pub fine_samples: usize,
    /// Metrics JSON output.
    #[arg(long)]
    pub metrics: PathBuf,
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad resolution {s:?}: {e}"));
    let (w, h) = (parse(w)?, parse(h)?);
    if w == 0 || h == 0 {
        return Err(format!("resolution must be at least 1x1, got {s}"));
    }
    Ok((w, h))
}

fn parse_mode(s: &str) -> Result<RenderMode, String> {
    s.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("64x32"), Ok((64, 32)));
        assert!(parse_resolution("0x4").is_err());
        assert!(parse_resolution("64").is_err());
    }
}
