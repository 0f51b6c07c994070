use std::path::Path;

use osf_core::io::{DatasetManifest, Split};
use osf_core::neural::{load_split, loss_curve_csv, Checkpoint, MlpConfig, NeuralError, TrainConfig, Trainer};

use super::Context;
use crate::args::TrainArgs;
use crate::error::{CliError, Result};

pub fn train(ctx: &Context, a: &TrainArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.dataset)?;
    let bounds = manifest.object_bounds()?;
    let config = train_config(ctx, a, &manifest);
    let mut trainer = match &a.resume {
        Some(path) => {
            if a.pos_freqs.is_some()
                || a.dir_freqs.is_some()
                || a.trunk_depth.is_some()
                || a.trunk_width.is_some()
                || a.skip_layer.is_some()
                || a.scatter_depth.is_some()
                || a.scatter_width.is_some()
                || a.sigmoid_delta.is_some()
                || a.blind_light_dir
            {
                return Err(CliError::Usage("network shape flags cannot change a resumed checkpoint".into()));
            }
            let t = Checkpoint::load(path)?.into_trainer(config)?;
            if t.bounds != bounds {
                return Err(CliError::Data(format!("{} was trained on a different object box", path.display())));
            }
            t
        }
        None => Trainer::new(mlp_config(a), config, bounds)?,
    };
    let data = load_split(&a.dataset, &manifest, Split::Train, true)?;
    if data.is_empty() {
        return Err(CliError::Data("no training ray hits the object's box".into()));
    }
    ctx.progress(|| format!("{} training rays, starting at iteration {}", data.len(), trainer.iteration));

    let csv_path = a.loss_csv.clone().unwrap_or_else(|| a.out_checkpoint.with_extension("loss.csv"));
    let prior = match &a.resume {
        Some(_) => earlier_rows(&csv_path, trainer.iteration),
        None => String::new(),
    };
    let write_csv = |t: &Trainer| -> Result<()> {
        let mut text = loss_curve_csv(&t.curve);
        if !prior.is_empty() {
            let (header, rows) = text.split_once('\n').unwrap_or((&text, ""));
            text = format!("{header}\n{prior}{rows}");
        }
        std::fs::write(&csv_path, text).map_err(|e| CliError::Data(format!("{}: {e}", csv_path.display())))
    };
    let save = |t: &Trainer| -> Result<()> {
        Checkpoint::from_trainer(t).save(&a.out_checkpoint)?;
        write_csv(t)
    };

    let mut saved_finite = false;
    while trainer.iteration < trainer.config.iterations {
        match trainer.step(&data) {
            Ok(rec) => {
                if ctx.verbose && (rec.iteration % 100 == 0 || trainer.iteration == trainer.config.iterations) {
                    eprintln!("iter {:>7}  coarse {:.6}  fine {:.6}", rec.iteration, rec.coarse_loss, rec.fine_loss);
                }
                if a.checkpoint_every > 0 && trainer.iteration % a.checkpoint_every == 0 {
                    save(&trainer)?;
                    saved_finite = true;
                }
            }
            Err(e @ NeuralError::Divergence { .. }) => {
                // a loss that went non-finite before the update leaves the
                // weights intact; otherwise the last periodic save stands
                let intact = trainer.coarse.check_finite().and(trainer.fine.check_finite()).is_ok();
                if intact {
                    save(&trainer)?;
                } else if !saved_finite {
                    eprintln!("osf: no finite checkpoint was saved before divergence");
                }
                write_csv(&trainer)?;
                return Err(e.into());
            }
            Err(e) => return Err(e.into()),
        }
    }
    save(&trainer)
}

fn train_config(ctx: &Context, a: &TrainArgs, manifest: &DatasetManifest) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        batch_rays: a.batch_rays.unwrap_or(d.batch_rays),
        coarse_samples: a.coarse_samples.unwrap_or(d.coarse_samples),
        fine_samples: a.fine_samples.unwrap_or(d.fine_samples),
        chunk_rays: a.chunk_rays.unwrap_or(d.chunk_rays),
        iterations: a.iters.unwrap_or(d.iterations),
        seed: ctx.seed,
        background: manifest.background,
        ..d
    }
}

fn mlp_config(a: &TrainArgs) -> MlpConfig {
    let d = MlpConfig::default();
    let trunk_depth = a.trunk_depth.unwrap_or(d.trunk_depth);
    MlpConfig {
        pos_freqs: a.pos_freqs.unwrap_or(d.pos_freqs),
        dir_freqs: a.dir_freqs.unwrap_or(d.dir_freqs),
        trunk_depth,
        trunk_width: a.trunk_width.unwrap_or(d.trunk_width),
        skip_layer: match a.skip_layer {
            Some(0) => None,
            Some(l) => Some(l),
            None => d.skip_layer.filter(|&l| l < trunk_depth),
        },
        scatter_depth: a.scatter_depth.unwrap_or(d.scatter_depth),
        scatter_width: a.scatter_width.unwrap_or(d.scatter_width),
        sigmoid_delta: a.sigmoid_delta.unwrap_or(d.sigmoid_delta),
        blind_light_dir: a.blind_light_dir,
    }
}

/// Rows of an existing loss CSV for iterations before `start`.
fn earlier_rows(path: &Path, start: u64) -> String {
    let Ok(text) = std::fs::read_to_string(path) else { return String::new() };
    text.lines()
        .skip(1)
        .filter(|l| l.split(',').next().and_then(|i| i.parse::<u64>().ok()).is_some_and(|i| i < start))
        .map(|l| format!("{l}\n"))
        .collect()
}
