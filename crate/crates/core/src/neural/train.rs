//! Image-supervised optimisation of a coarse/fine network pair.
//!
//! Each ray is rendered twice: the coarse network at `N_c` stratified
//! distances, then the fine network at those plus `N_f` distances drawn from
//! the coarse compositing weights. Both renders are compared against the
//! target pixel with a squared error, and gradients flow back through the
//! compositing sum into both networks. The fine distances are treated as
//! constants, so the coarse network learns only from its own render.
//!
//! Training assumes a single unoccluded point light per image, where the
//! in-scattered radiance at a sample is `ρ(x, ω_l, ω_o) · radiance`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::{Cache, Inputs, Mlp, MlpConfig, Outputs};
use super::resample::{hierarchical_resample, merge_sorted};
use super::{Adam, AdamParams, NeuralError, Scalar};
use crate::geom::{stratified_into, Aabb, Ray, Rgb, Rng, Vec3};
use crate::geom::ray_box_intersect;
use crate::render::interval_widths;

/// One supervised pixel, expressed in the object's canonical frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainSample {
    pub ray: Ray,
    pub light_pos: Vec3,
    pub light_radiance: Rgb,
    pub target: Rgb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_rays: usize,
    pub coarse_samples: usize,
    pub fine_samples: usize,
    pub iterations: u64,
    pub seed: u64,
    /// Rays per unit of parallel work. Gradients are summed chunk by chunk in
    /// batch order, so results do not depend on the thread count.
    pub chunk_rays: usize,
    pub background: Rgb,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            batch_rays: 4096,
            coarse_samples: 64,
            fine_samples: 128,
            iterations: 200_000,
            seed: 0,
            chunk_rays: 64,
            background: Rgb::BLACK,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    pub fn pass(&self) -> PassOptions {
        PassOptions {
            coarse_samples: self.coarse_samples,
            fine_samples: self.fine_samples,
            chunk_rays: self.chunk_rays,
            background: self.background,
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::Config(m.into()));
        if !(self.learning_rate > 0.0 && self.epsilon > 0.0) {
            return bad("learning rate and epsilon must be positive");
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.batch_rays == 0 || self.coarse_samples == 0 || self.fine_samples == 0 || self.chunk_rays == 0 {
            return bad("batch size, sample counts and chunk size must be at least 1");
        }
        Ok(())
    }
}

/// Sampling parameters shared by training and inference renders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassOptions {
    pub coarse_samples: usize,
    pub fine_samples: usize,
    pub chunk_rays: usize,
    pub background: Rgb,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub iteration: u64,
    pub coarse_loss: f64,
    pub fine_loss: f64,
}

impl LossRecord {
    pub fn total(&self) -> f64 {
        self.coarse_loss + self.fine_loss
    }
}

/// Summed squared-error losses and parameter gradients of a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<S> {
    pub coarse_loss: f64,
    pub fine_loss: f64,
    pub coarse: Vec<S>,
    pub fine: Vec<S>,
}

impl<S: Scalar> Gradients<S> {
    fn zeros(nc: usize, nf: usize) -> Self {
        Self { coarse_loss: 0.0, fine_loss: 0.0, coarse: vec![S::zero(); nc], fine: vec![S::zero(); nf] }
    }

    fn add(&mut self, o: &Gradients<S>) {
        self.coarse_loss += o.coarse_loss;
        self.fine_loss += o.fine_loss;
        for (a, b) in self.coarse.iter_mut().zip(&o.coarse) {
            *a = *a + *b;
        }
        for (a, b) in self.fine.iter_mut().zip(&o.fine) {
            *a = *a + *b;
        }
    }
}

/// Forward state of one network over a chunk of rays.
struct Pass<S> {
    /// Sample distances per ray; empty for rays missing the box.
    ts: Vec<Vec<f64>>,
    spans: Vec<Option<(f64, f64)>>,
    cache: Cache<S>,
    out: Outputs<S>,
    colors: Vec<[f64; 3]>,
    weights: Vec<Vec<f64>>,
}

fn forward_pass<S: Scalar>(
    mlp: &Mlp<S>,
    rays: &[TrainSample],
    spans: &[Option<(f64, f64)>],
    ts: Vec<Vec<f64>>,
    background: Rgb,
    keep_cache: bool,
) -> Pass<S> {
    let cfg = mlp.config();
    let total: usize = ts.iter().map(Vec::len).sum();
    let mut inputs = Inputs::with_capacity(cfg, total);
    for (s, t) in rays.iter().zip(&ts) {
        for &ti in t {
            let x = s.ray.at(ti);
            let wl = (s.light_pos - x).normalized().unwrap_or(-s.ray.direction);
            inputs.push(cfg, x, wl, s.ray.direction);
        }
    }
    let mut cache = Cache::default();
    let out = if total > 0 { mlp.forward(&inputs, &mut cache) } else { Outputs::default() };
    let mut colors = Vec::with_capacity(rays.len());
    let mut weights = Vec::with_capacity(rays.len());
    let mut offset = 0;
    for (r, s) in rays.iter().enumerate() {
        let n = ts[r].len();
        let (c, w) = match spans[r] {
            Some(span) if n > 0 => {
                let sigma = &out.sigma[offset..offset + n];
                let rho = &out.rho[3 * offset..3 * (offset + n)];
                composite(&ts[r], span, sigma, rho, s.light_radiance, background)
            }
            _ => (background.0, Vec::new()),
        };
        colors.push(c);
        weights.push(w);
        offset += n;
    }
    if !keep_cache {
        cache = Cache::default();
    }
    Pass { ts, spans: spans.to_vec(), cache, out, colors, weights }
}

/// Front-to-back compositing; returns the colour and per-sample weights.
fn composite<S: Scalar>(t: &[f64], span: (f64, f64), sigma: &[S], rho: &[S], radiance: Rgb, bg: Rgb) -> ([f64; 3], Vec<f64>) {
    let mut trans = 1.0;
    let mut c = [0.0; 3];
    let mut w = Vec::with_capacity(t.len());
    for (i, dt) in interval_widths(t, span).enumerate() {
        let a = -(-sigma[i].as_f64() * dt).exp_m1();
        let wi = trans * a;
        for k in 0..3 {
            c[k] += wi * rho[3 * i + k].as_f64() * radiance.0[k];
        }
        w.push(wi);
        trans *= 1.0 - a;
    }
    for k in 0..3 {
        c[k] += trans * bg.0[k];
    }
    (c, w)
}

/// Reverse of [`composite`]: `∂C/∂σ_i = Δ_i (T_{i+1} c_i − S_i)` where `S_i`
/// is everything composited behind sample `i`, and `∂C/∂ρ_i = w_i · radiance`.
#[allow(clippy::too_many_arguments)]
fn composite_backward<S: Scalar>(
    t: &[f64],
    span: (f64, f64),
    sigma: &[S],
    rho: &[S],
    radiance: Rgb,
    bg: Rgb,
    d_color: [f64; 3],
    d_sigma: &mut [S],
    d_rho: &mut [S],
) {
    let n = t.len();
    let dts: Vec<f64> = interval_widths(t, span).collect();
    let mut trans = Vec::with_capacity(n + 1);
    let mut alpha = Vec::with_capacity(n);
    trans.push(1.0);
    for i in 0..n {
        let a = -(-sigma[i].as_f64() * dts[i]).exp_m1();
        alpha.push(a);
        trans.push(trans[i] * (1.0 - a));
    }
    let dot = |v: [f64; 3]| v[0] * d_color[0] + v[1] * d_color[1] + v[2] * d_color[2];
    let mut behind = dot([trans[n] * bg.0[0], trans[n] * bg.0[1], trans[n] * bg.0[2]]);
    for i in (0..n).rev() {
        let ci = [0, 1, 2].map(|k| rho[3 * i + k].as_f64() * radiance.0[k]);
        let dc = dot(ci);
        d_sigma[i] = S::of(dts[i] * (trans[i + 1] * dc - behind));
        let w = trans[i] * alpha[i];
        for k in 0..3 {
            d_rho[3 * i + k] = S::of(w * radiance.0[k] * d_color[k]);
        }
        behind += w * dc;
    }
}

fn spans_of(rays: &[TrainSample], bounds: &Aabb) -> Vec<Option<(f64, f64)>> {
    rays.iter().map(|s| ray_box_intersect(&s.ray, bounds)).collect()
}

fn coarse_distances(spans: &[Option<(f64, f64)>], n: usize, rngs: &mut [Rng]) -> Vec<Vec<f64>> {
    spans
        .iter()
        .zip(rngs.iter_mut())
        .map(|(span, rng)| {
            let mut t = Vec::new();
            if let Some((a, b)) = span {
                if stratified_into(*a, *b, n, rng, &mut t).is_err() {
                    t.clear();
                }
            }
            t
        })
        .collect()
}

fn fine_distances(coarse: &Pass<impl Scalar>, n: usize, rngs: &mut [Rng]) -> Vec<Vec<f64>> {
    coarse
        .ts
        .iter()
        .zip(&coarse.weights)
        .zip(&coarse.spans)
        .zip(rngs.iter_mut())
        .map(|(((t, w), span), rng)| match span {
            Some((a, b)) if !t.is_empty() => merge_sorted(t, &hierarchical_resample(*a, *b, t, w, n, rng)),
            _ => Vec::new(),
        })
        .collect()
}

fn backward_pass<S: Scalar>(mlp: &Mlp<S>, pass: &Pass<S>, rays: &[TrainSample], targets: &[Rgb], bg: Rgb, grad: &mut [S]) -> f64 {
    let total = pass.out.sigma.len();
    let mut d_sigma = vec![S::zero(); total];
    let mut d_rho = vec![S::zero(); 3 * total];
    let mut loss = 0.0;
    let mut offset = 0;
    for (r, s) in rays.iter().enumerate() {
        let c = pass.colors[r];
        let diff = [0, 1, 2].map(|k| c[k] - targets[r].0[k]);
        loss += diff.iter().map(|d| d * d).sum::<f64>();
        let n = pass.ts[r].len();
        if let (Some(span), true) = (pass.spans[r], n > 0) {
            composite_backward(
                &pass.ts[r],
                span,
                &pass.out.sigma[offset..offset + n],
                &pass.out.rho[3 * offset..3 * (offset + n)],
                s.light_radiance,
                bg,
                diff.map(|d| 2.0 * d),
                &mut d_sigma[offset..offset + n],
                &mut d_rho[3 * offset..3 * (offset + n)],
            );
        }
        offset += n;
    }
    if total > 0 {
        mlp.backward(&pass.cache, &d_sigma, &d_rho, grad);
    }
    loss
}

/// Summed coarse and fine losses of `batch` with their gradients. Ray `b`
/// draws its sample distances from `ray_rngs[b]`.
pub fn mlp_backward<S: Scalar>(
    coarse: &Mlp<S>,
    fine: &Mlp<S>,
    batch: &[TrainSample],
    ray_rngs: &[Rng],
    bounds: &Aabb,
    opts: &PassOptions,
) -> Result<Gradients<S>, NeuralError> {
    if batch.is_empty() {
        return Err(NeuralError::Config("empty batch".into()));
    }
    assert_eq!(batch.len(), ray_rngs.len(), "one stream per ray");
    let chunk = opts.chunk_rays.max(1);
    let (nc, nf) = (coarse.params().len(), fine.params().len());
    let starts: Vec<usize> = (0..batch.len()).step_by(chunk).collect();
    let mut total = Gradients::zeros(nc, nf);
    // bounded windows keep at most a few chunk gradients alive at once
    for window in starts.chunks(16) {
        let parts: Vec<Gradients<S>> = window
            .par_iter()
            .map(|&start| {
                let rays = &batch[start..(start + chunk).min(batch.len())];
                let mut rngs = ray_rngs[start..start + rays.len()].to_vec();
                let targets: Vec<Rgb> = rays.iter().map(|s| s.target).collect();
                let spans = spans_of(rays, bounds);
                let mut g = Gradients::zeros(nc, nf);
                let tc = coarse_distances(&spans, opts.coarse_samples, &mut rngs);
                let pc = forward_pass(coarse, rays, &spans, tc, opts.background, true);
                let tf = fine_distances(&pc, opts.fine_samples, &mut rngs);
                g.coarse_loss = backward_pass(coarse, &pc, rays, &targets, opts.background, &mut g.coarse);
                drop(pc.cache);
                let pf = forward_pass(fine, rays, &spans, tf, opts.background, true);
                g.fine_loss = backward_pass(fine, &pf, rays, &targets, opts.background, &mut g.fine);
                g
            })
            .collect();
        for p in &parts {
            total.add(p);
        }
    }
    if !(total.coarse_loss.is_finite() && total.fine_loss.is_finite()) {
        return Err(NeuralError::NonFinite(format!(
            "loss is not finite (coarse {}, fine {})",
            total.coarse_loss, total.fine_loss
        )));
    }
    Ok(total)
}

/// Activation patterns (see [`Cache::activation_pattern`]) of the coarse and
/// fine passes that [`mlp_backward`] would run on `batch`.
pub fn activation_patterns<S: Scalar>(
    coarse: &Mlp<S>,
    fine: &Mlp<S>,
    batch: &[TrainSample],
    ray_rngs: &[Rng],
    bounds: &Aabb,
    opts: &PassOptions,
) -> (Vec<bool>, Vec<bool>) {
    let mut rngs = ray_rngs.to_vec();
    let spans = spans_of(batch, bounds);
    let tc = coarse_distances(&spans, opts.coarse_samples, &mut rngs);
    let pc = forward_pass(coarse, batch, &spans, tc, opts.background, true);
    let tf = fine_distances(&pc, opts.fine_samples, &mut rngs);
    let pf = forward_pass(fine, batch, &spans, tf, opts.background, true);
    (
        pc.cache.activation_pattern(coarse.config().sigmoid_delta),
        pf.cache.activation_pattern(fine.config().sigmoid_delta),
    )
}

/// Coarse and fine colours of each ray; no gradients.
pub fn render_rays<S: Scalar>(
    coarse: &Mlp<S>,
    fine: &Mlp<S>,
    rays: &[TrainSample],
    bounds: &Aabb,
    opts: &PassOptions,
    rng: &Rng,
) -> Vec<([f64; 3], [f64; 3])> {
    let chunk = opts.chunk_rays.max(1);
    rays.par_chunks(chunk)
        .enumerate()
        .flat_map_iter(|(ci, part)| {
            let start = ci * chunk;
            let mut rngs: Vec<Rng> = (start..start + part.len()).map(|b| rng.derive(b as u64)).collect();
            let spans = spans_of(part, bounds);
            let tc = coarse_distances(&spans, opts.coarse_samples, &mut rngs);
            let pc = forward_pass(coarse, part, &spans, tc, opts.background, false);
            let tf = fine_distances(&pc, opts.fine_samples, &mut rngs);
            let pf = forward_pass(fine, part, &spans, tf, opts.background, false);
            pc.colors.into_iter().zip(pf.colors).collect::<Vec<_>>()
        })
        .collect()
}

/// Coarse/fine pair with optimiser state; resumable at any iteration.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub config: TrainConfig,
    pub bounds: Aabb,
    pub coarse: Mlp<f32>,
    pub fine: Mlp<f32>,
    pub adam_coarse: Adam<f32>,
    pub adam_fine: Adam<f32>,
    /// Number of completed steps.
    pub iteration: u64,
    pub curve: Vec<LossRecord>,
}

impl Trainer {
    /// Fresh networks initialised from `config.seed`.
    pub fn new(mlp: MlpConfig, config: TrainConfig, bounds: Aabb) -> Result<Self, NeuralError> {
        config.validate()?;
        let init = Rng::new(config.seed).derive(u64::MAX);
        let coarse = Mlp::new(mlp, &mut init.derive(0))?;
        let fine = Mlp::new(mlp, &mut init.derive(1))?;
        let adam_coarse = Adam::new(config.adam(), coarse.params().len());
        let adam_fine = Adam::new(config.adam(), fine.params().len());
        Ok(Self { config, bounds, coarse, fine, adam_coarse, adam_fine, iteration: 0, curve: Vec::new() })
    }

    pub fn pass(&self) -> PassOptions {
        self.config.pass()
    }

    /// One Adam step on a batch drawn with replacement from `data`. The draw
    /// and all sampling depend only on the seed and the iteration number.
    ///
    /// A non-finite loss aborts before any update, leaving the pair intact;
    /// non-finite weights after the update are reported as well, but the
    /// state is then spoiled.
    pub fn step(&mut self, data: &[TrainSample]) -> Result<LossRecord, NeuralError> {
        if data.is_empty() {
            return Err(NeuralError::Config("training set is empty".into()));
        }
        let it_rng = Rng::new(self.config.seed).derive(self.iteration);
        let mut pick = it_rng.derive(0);
        let batch: Vec<TrainSample> = (0..self.config.batch_rays).map(|_| data[pick.below(data.len())]).collect();
        let streams = it_rng.derive(1);
        let rngs: Vec<Rng> = (0..batch.len()).map(|b| streams.derive(b as u64)).collect();
        let mut g = mlp_backward(&self.coarse, &self.fine, &batch, &rngs, &self.bounds, &self.pass())
            .map_err(|e| match e {
                NeuralError::NonFinite(m) => NeuralError::Divergence { iteration: self.iteration, msg: m },
                other => other,
            })?;
        let scale = 1.0 / batch.len() as f32;
        g.coarse.iter_mut().chain(g.fine.iter_mut()).for_each(|v| *v *= scale);
        self.adam_coarse.update(self.coarse.params_mut(), &g.coarse);
        self.adam_fine.update(self.fine.params_mut(), &g.fine);
        if let Err(e) = self.coarse.check_finite().and_then(|_| self.fine.check_finite()) {
            return Err(NeuralError::Divergence { iteration: self.iteration, msg: e.to_string() });
        }
        let rec = LossRecord {
            iteration: self.iteration,
            coarse_loss: g.coarse_loss / batch.len() as f64,
            fine_loss: g.fine_loss / batch.len() as f64,
        };
        self.iteration += 1;
        self.curve.push(rec);
        Ok(rec)
    }

    /// Steps until `config.iterations` are done, calling `progress` after each.
    pub fn run(&mut self, data: &[TrainSample], mut progress: impl FnMut(&LossRecord)) -> Result<(), NeuralError> {
        while self.iteration < self.config.iterations {
            let rec = self.step(data)?;
            progress(&rec);
        }
        Ok(())
    }

    /// Fine-network colours for `rays`, sampled with a fixed seed.
    pub fn render(&self, rays: &[TrainSample], seed: u64) -> Vec<Rgb> {
        render_rays(&self.coarse, &self.fine, rays, &self.bounds, &self.pass(), &Rng::new(seed))
            .into_iter()
            .map(|(_, f)| Rgb(f))
            .collect()
    }
}

/// Trains a fresh pair for `config.iterations` steps.
pub fn train(
    data: &[TrainSample],
    mlp: MlpConfig,
    config: TrainConfig,
    bounds: Aabb,
) -> Result<(Mlp<f32>, Mlp<f32>, Vec<LossRecord>), NeuralError> {
    let mut t = Trainer::new(mlp, config, bounds)?;
    t.run(data, |_| {})?;
    Ok((t.coarse, t.fine, t.curve))
}

/// CSV with header `iteration,coarse_loss,fine_loss`.
pub fn loss_curve_csv(curve: &[LossRecord]) -> String {
    let mut s = String::from("iteration,coarse_loss,fine_loss\n");
    for r in curve {
        s.push_str(&format!("{},{},{}\n", r.iteration, r.coarse_loss, r.fine_loss));
    }
    s
}
